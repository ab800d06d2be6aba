#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "wavekit/numgrid.hpp"
#include "wavekit/potentials.hpp"

namespace wavekit::shooting {

// Squared local wavenumber of psi'' = -k2(E, V) psi for a constant potential V.
// Negative values mean exponential behaviour; NaN marks a singular (E, V) pair.
using LocalWavenumber = std::function<double(double energy, double potential)>;

// Shooting function for a Dirichlet box with piecewise-constant potential.
//
// Starting from psi = 0 at the left wall with unit slope, the solution is carried
// region by region with the closed-form solution of each constant region and the
// value at the right wall is returned. Two models are supported:
//   continuum  the ODE itself (sin/cos or sinh/cosh per region);
//   lattice    the three-point recurrence of the second-order laplacian on a grid,
//              whose constant-coefficient solution per run of nodes is a Chebyshev
//              polynomial of the one-step transfer matrix. Its roots are exactly the
//              eigenvalues of the corresponding grid problem.
// Values are rescaled by positive, energy-continuous factors, so only the sign
// and zeros are meaningful.
class MatchingFunction {
 public:
  static MatchingFunction continuum(std::vector<Region> regions, LocalWavenumber k2);
  static MatchingFunction lattice(const Grid& grid, std::vector<double> node_potential, LocalWavenumber k2);

  // nullopt when any region is singular at this energy.
  std::optional<double> operator()(double energy) const;

  // Interior sign changes of the solution at this energy.
  std::size_t node_count(double energy) const;

  // Normalized solution sampled on the grid (the lattice grid in lattice mode).
  WaveField state(double energy, const Grid& grid) const;

  bool is_lattice() const { return lattice_; }
  double x_left() const;
  double x_right() const;

 private:
  MatchingFunction() = default;
  std::vector<double> lattice_values(double energy) const;
  std::optional<std::pair<double, double>> continuum_value(double energy, double x_stop) const;

  bool lattice_ = false;
  std::vector<Region> regions_;
  LocalWavenumber k2_;
  // lattice mode
  std::vector<double> node_potential_;
  double h_ = 0.0;
  double x0_ = 0.0;
};

struct RootScan {
  std::vector<double> roots;             // ascending
  std::vector<std::size_t> node_counts;  // per root
  std::vector<double> skipped;           // scan energies where the function was singular
  std::size_t evaluations = 0;
};

struct ScanOptions {
  std::size_t scan_points = 2000;
  // Energies that must never be evaluated (E = V_j and the like); the bracket is split there.
  std::vector<double> excluded;
  // Subdivide scan cells whose end-point node counts disagree with the sign test.
  bool node_refinement = true;
  std::size_t max_refinement_depth = 30;
};

// All roots in [lo, hi] found by scanning for sign changes and bisecting each to
// machine precision. The function is continuous between excluded energies, so
// every sign change inside a piece is a root.
RootScan find_roots(const MatchingFunction& f, double lo, double hi, const ScanOptions& options = {});

// Number of sign changes of f on a uniform scan of n points (the brute-force oracle).
std::size_t count_sign_changes(const MatchingFunction& f, double lo, double hi, std::size_t n,
                               const std::vector<double>& excluded = {});

}  // namespace wavekit::shooting
