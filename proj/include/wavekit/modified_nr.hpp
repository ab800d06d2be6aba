#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wavekit/numgrid.hpp"
#include "wavekit/potentials.hpp"
#include "wavekit/reference.hpp"
#include "wavekit/shooting.hpp"
#include "wavekit/units.hpp"

namespace wavekit::modified_nr {

// How the effective potential treats nodes where E - V(x) is (nearly) zero.
struct Regularization {
  enum class Mode { reject, clamp };
  Mode mode = Mode::reject;
  // Denominator floor; non-positive means 1e-6 times the energy scale max(|E|, max|V|).
  double floor = 0.0;
};

// W(E, x) = 3 V - V^2/(E - V), so that Eq. [-hbar^2/2m lap + W(E)] psi = E psi.
std::vector<double> effective_potential(const PotentialSpec& potential, double energy, const Grid& grid,
                                        const Regularization& guard = {});

// Local coefficient (E - 2V)^2/(E - V) of -hbar^2/2m psi'' = q psi; NaN at E = V.
double local_coefficient(double energy, double potential);

enum class Method { fixed_point, shooting };
const char* to_string(Method method);

struct ModifiedEigenResult {
  double energy = 0.0;
  WaveField state;
  std::size_t iterations = 0;
  double self_consistency_residual = 0.0;
  std::size_t node_count = 0;
  Method method = Method::fixed_point;
  std::vector<double> history;  // energy iterates (fixed point) or bracket scan size
  std::vector<double> skipped;  // singular energies skipped by the shooting scan

  explicit ModifiedEigenResult(Grid g) : state(g) {}
};

// Plain damping only converges where d eig/dE = <V^2/(E - V)^2> < 1, which excludes
// most square-well states; newton replaces the damped update by a Newton step on
// eig(E) - E with the Hellmann-Feynman slope.
enum class Acceleration { none, newton };

struct FixedPointOptions {
  double damping = 0.5;  // lambda in (0, 1]
  Acceleration acceleration = Acceleration::none;
  int order = 2;
  Regularization guard{};
};

// Damped self-consistency E <- (1 - lambda) E + lambda eig(E), following the
// eigenvector with `state_index` nodes. Succeeds when |eig(E) - E| <= tol;
// `iterations` and `max_iter` count eigen-solves.
ModifiedEigenResult solve_stationary_fixed_point(const Grid& grid, const PotentialSpec& potential,
                                                 std::size_t state_index, double energy_init, double tol,
                                                 std::size_t max_iter, const UnitSystem& units,
                                                 const FixedPointOptions& options = {});

struct ShootingOptions {
  enum class Model { continuum, lattice };
  Model model = Model::continuum;
  std::size_t scan_points = 2000;
  // Return the root with this node count instead of the lowest root in the bracket.
  std::optional<std::size_t> node_count;
};

shooting::MatchingFunction matching_function(const Grid& grid, const PotentialSpec& potential,
                                             const UnitSystem& units, ShootingOptions::Model model);

// Energies E = V_j of the constant regions; the shooting scan never evaluates them.
std::vector<double> singular_energies(const PotentialSpec& potential, const Grid& grid);

// Every root of the matching function in the bracket.
std::vector<ModifiedEigenResult> shooting_spectrum(const Grid& grid, const PotentialSpec& potential, double e_lo,
                                                   double e_hi, const UnitSystem& units,
                                                   const ShootingOptions& options = {});

ModifiedEigenResult solve_stationary_shooting(const Grid& grid, const PotentialSpec& potential, double e_lo,
                                              double e_hi, const UnitSystem& units,
                                              const ShootingOptions& options = {});

struct AdditionalTermReport {
  double minus_2V_part = 0.0;
  double pv_part = 0.0;
  double first_order_shift = 0.0;
  double shift_ratio = 0.0;  // |first_order_shift / E_ref|
  bool pv_flag = false;      // E_ref - V changes sign inside the domain
  SingularSet poles;
  std::vector<double> excision_radii;
  std::vector<double> excision_values;
  bool pv_converged = true;
};

// First-order expectation of -2V + V^2/(E_ref - V) in a normalized reference state.
// The second part is a symmetric-excision principal value when E_ref - V changes sign.
AdditionalTermReport additional_term_report(const WaveField& psi_ref, double energy_ref,
                                            const PotentialSpec& potential, const UnitSystem& units);

// State of the second-order-in-time equation: the field and its time derivative.
struct TimeDepState {
  WaveField psi;
  WaveField dpsi_dt;
  double t = 0.0;
  double energy = 0.0;   // E, fixed scenario parameter
  double epsilon = 0.0;  // free energy, fixed scenario parameter
};

// s(x) = (eps^2/2m) (E - V)/(E - 2V)^2, the squared local wave speed.
std::vector<double> wave_speed_squared(const PotentialSpec& potential, double energy, double epsilon,
                                       const Grid& grid, const UnitSystem& units);

// Largest stable leapfrog step (0.9 h / sqrt(max s)).
double max_stable_dt(const std::vector<double>& speed2, const Grid& grid);

// Leapfrog evolution of d^2 psi/dt^2 = s(x) lap psi.
Trajectory propagate_timedep(const TimeDepState& state0, const PotentialSpec& potential, double dt,
                             std::size_t steps, const UnitSystem& units, std::size_t frame_stride = 10);

// f(t) = B1 exp(i eps t/hbar) + B2 exp(-i eps t/hbar).
std::complex<double> time_factor(double epsilon, std::complex<double> b1, std::complex<double> b2, double t,
                                 const UnitSystem& units);

// psi_n(x) f(t).
WaveField separated_solution(const WaveField& psi_n, double epsilon, std::complex<double> b1,
                             std::complex<double> b2, double t, const UnitSystem& units);

double separation_constant(double epsilon, const UnitSystem& units);

// |f'' + (eps/hbar)^2 f| at t with the five-point second difference of step dt.
double time_factor_residual(double epsilon, std::complex<double> b1, std::complex<double> b2, double t, double dt,
                            const UnitSystem& units);

// C recovered from the spatial separated equation as the |psi|^2-weighted mean of
// (eps^2/2m) (E - V)/(E - 2V)^2 (lap psi)/psi over nodes where psi is significant.
double recover_separation_constant(const WaveField& psi_n, const PotentialSpec& potential, double energy,
                                   double epsilon, const UnitSystem& units);

}  // namespace wavekit::modified_nr
