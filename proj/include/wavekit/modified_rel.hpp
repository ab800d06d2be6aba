#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "wavekit/modified_nr.hpp"
#include "wavekit/numgrid.hpp"
#include "wavekit/potentials.hpp"
#include "wavekit/reference.hpp"
#include "wavekit/units.hpp"

namespace wavekit::modified_rel {

struct RelScenario {
  UnitSystem units;
  PotentialSpec potential;
  Grid grid;
};

// Throws InvalidScenarioError unless V(x) > -E0 at every node.
void validate(const RelScenario& scenario);

// g = [(E - V)^2 - E0^2] (1 + V/E0)^2, so that -c^2 hbar^2 psi'' = g psi.
double local_coefficient(double energy, double potential, const UnitSystem& units);

// True when V varies on the grid: then eps = E - V and eps = sqrt(c^2 p^2 + E0^2)
// cannot both hold with a single constant eps.
bool epsilon_definition_conflict(const RelScenario& scenario);

using modified_nr::ModifiedEigenResult;
using modified_nr::ShootingOptions;

// Continuum shooting needs a piecewise-constant potential; lattice shooting takes
// any potential sampled on a dirichlet line grid.
std::vector<ModifiedEigenResult> rel_spectrum(const RelScenario& scenario, double e_lo, double e_hi,
                                              const ShootingOptions& options = {});

ModifiedEigenResult solve_rel_stationary(const RelScenario& scenario, double e_lo, double e_hi,
                                         const ShootingOptions& options = {});

// Largest stable leapfrog step: 0.9 * 2/omega_max with
// omega_max^2 = max (4 c^2/h^2 + E0^2/hbar^2)/(1 + V/E0)^2.
double max_stable_dt(const RelScenario& scenario);

// Leapfrog for d^2 Phi/dt^2 = [c^2 lap - E0^2/hbar^2] Phi/(1 + V/E0)^2. With V = 0 the
// factor is exactly 1 and the update is the discrete Klein-Gordon step.
Trajectory propagate_rel_timedep(const WaveField& phi0, const WaveField& dphi0_dt, const RelScenario& scenario,
                                 double dt, std::size_t steps, std::size_t frame_stride = 10);

// V = e eps phi / E0 for a purely electrostatic field. A nonzero vector potential is
// out of scope.
double electrostatic_invariant_potential(double phi, double epsilon, double charge, const UnitSystem& units,
                                         double vector_potential = 0.0);

}  // namespace wavekit::modified_rel
