#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "wavekit/numgrid.hpp"
#include "wavekit/potentials.hpp"
#include "wavekit/units.hpp"

namespace wavekit::spin_half {

// Two-component field of the 1D reduction (alpha = sigma_x, beta = sigma_z).
struct SpinorField {
  Grid grid;
  std::vector<complex> upper;
  std::vector<complex> lower;

  explicit SpinorField(Grid g) : grid(g), upper(g.size()), lower(g.size()) {}
  std::size_t size() const { return upper.size(); }
};

double norm(const SpinorField& psi);
complex inner_product(const SpinorField& a, const SpinorField& b);

// Dense complex square matrix, row major.
struct CMatrix {
  std::size_t n = 0;
  std::vector<complex> a;

  static CMatrix zero(std::size_t n);
  static CMatrix identity(std::size_t n);
  complex& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  complex operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

CMatrix operator*(const CMatrix& x, const CMatrix& y);
CMatrix operator+(const CMatrix& x, const CMatrix& y);

struct CliffordSet {
  enum class Dimension { two, four };
  Dimension dimension = Dimension::four;
  std::vector<CMatrix> alpha;
  CMatrix beta;
  std::array<CMatrix, 3> pauli;

  static CliffordSet dirac();    // 4x4 standard representation
  static CliffordSet reduced();  // alpha = sigma_x, beta = sigma_z
};

std::array<CMatrix, 3> pauli_matrices();

struct CliffordReport {
  double max_violation = 0.0;
  std::map<std::string, double> identities;  // worst entry of each identity's residual
};

CliffordReport clifford_check(const CliffordSet& set);

// (-i hbar c sigma_x D1 + E0 sigma_z) psi with the centered first difference, then
// multiplied pointwise by E0/(E0 + V).
SpinorField apply_modified_hamiltonian(const SpinorField& psi, const PotentialSpec& potential,
                                       const UnitSystem& units);

// H_D psi = -i hbar c sigma_x D1 psi + sigma_z (E0 - r hbar c (h/2) lap) psi. With
// massless = true the whole sigma_z term is dropped.
SpinorField apply_dirac_operator(const SpinorField& psi, const UnitSystem& units, double wilson_r = 0.0,
                                 bool massless = false);

struct SpinorSpectrum {
  std::vector<double> energies;  // sorted by |E|, negative first on ties
  std::vector<SpinorField> states;
  std::map<std::string, double> diagnostics;
};

// H_D psi = E (1 + V/E0) psi with a Wilson term of strength wilson_r.
SpinorSpectrum solve_spin_half_stationary(const Grid& grid, const PotentialSpec& potential,
                                          const UnitSystem& units, double wilson_r, std::size_t n_states);

// -i hbar c sigma_x D1 psi = E (1 + V/E0) psi. No Wilson term: the centered difference
// keeps O(h^2) accuracy and its doubler branch is left in the spectrum.
SpinorSpectrum solve_massless(const Grid& grid, const PotentialSpec& potential, const UnitSystem& units,
                              std::size_t n_states);

struct SpinorTrajectory {
  std::vector<double> times;
  std::vector<SpinorField> frames;
  std::vector<double> norms;  // every step
  std::map<std::string, double> diagnostics;
};

// Classical RK4 for d Phi/dt = -c sigma_x D1 Phi/(1 + V/E0).
SpinorTrajectory propagate_massless(const SpinorField& phi0, const PotentialSpec& potential, double dt,
                                    std::size_t steps, const UnitSystem& units, std::size_t frame_stride = 10);

}  // namespace wavekit::spin_half
