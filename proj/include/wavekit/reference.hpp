#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wavekit/numgrid.hpp"
#include "wavekit/potentials.hpp"
#include "wavekit/units.hpp"

namespace wavekit {

struct SpectrumResult {
  std::vector<double> energies;
  std::vector<WaveField> states;
  std::vector<std::size_t> node_counts;
  std::map<std::string, double> diagnostics;
};

// Stored frames of a time evolution plus per-step norms.
struct Trajectory {
  std::vector<double> times;
  std::vector<WaveField> frames;
  // Second spinor component, empty for scalar fields.
  std::vector<WaveField> lower_frames;
  std::vector<double> norms;  // one entry per step, including t = 0
  std::map<std::string, double> diagnostics;
};

namespace reference {

struct SchrodingerOptions {
  int order = 2;
  int l = 0;  // radial grids only
};

// -hbar^2/(2m) laplacian + V on the grid (radial grids use the reduced radial operator).
BandedOperator schrodinger_operator(const Grid& grid, const PotentialSpec& potential, const UnitSystem& units,
                                    const SchrodingerOptions& options = {});

// Lowest eigenpairs of a symmetric operator over the active nodes; states are
// embedded in the full grid, normalized and sign-fixed (first significant value > 0).
SpectrumResult lowest_states(const BandedOperator& op, std::size_t n_states);

SpectrumResult solve_schrodinger_stationary(const Grid& grid, const PotentialSpec& potential,
                                            std::size_t n_states, const UnitSystem& units,
                                            const SchrodingerOptions& options = {});

// Crank-Nicolson evolution with the second-order laplacian.
Trajectory propagate_schrodinger(const WaveField& psi0, const PotentialSpec& potential, double dt,
                                 std::size_t steps, const UnitSystem& units, std::size_t frame_stride = 10);

double klein_gordon_energy(double p, double rest_energy, double c);
std::pair<double, double> dirac_free_energies(double p, double rest_energy, double c);

// Analytic catalog.
double infinite_well_energy(int n, double width, const UnitSystem& units);
double harmonic_energy(int n, double omega, const UnitSystem& units);
double hydrogenic_energy(int n, double strength, const UnitSystem& units);
// Bound energies of -depth on |x| <= half_width (open domain), ascending, by
// bisection on the even/odd matching conditions.
std::vector<double> finite_well_energies(double depth, double half_width, const UnitSystem& units);

}  // namespace reference
}  // namespace wavekit
