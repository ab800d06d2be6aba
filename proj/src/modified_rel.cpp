#include "wavekit/modified_rel.hpp"

#include <algorithm>
#include <cmath>

#include "wavekit/errors.hpp"
#include "wavekit/shooting.hpp"

namespace wavekit::modified_rel {

void validate(const RelScenario& s) {
  s.units.validate();
  check_covers(s.potential, s.grid);
  const double e0 = s.units.rest_energy();
  const std::vector<double> v = sample(s.potential, s.grid);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > -e0)) {
      throw InvalidScenarioError("V(x) <= -E0 at x = " + format_number(s.grid.x(i)) +
                                 ": the factor (1 + V/E0) must stay positive");
    }
  }
}

double local_coefficient(double energy, double potential, const UnitSystem& units) {
  const double e0 = units.rest_energy();
  const double w = energy - potential;
  const double f = 1.0 + potential / e0;
  return (w * w - e0 * e0) * f * f;
}

bool epsilon_definition_conflict(const RelScenario& s) {
  const std::vector<double> v = sample(s.potential, s.grid);
  return std::any_of(v.begin(), v.end(), [&](double x) { return x != v.front(); });
}

std::vector<ModifiedEigenResult> rel_spectrum(const RelScenario& s, double e_lo, double e_hi,
                                              const ShootingOptions& options) {
  validate(s);
  if (s.grid.kind() != GridKind::line || s.grid.boundary() != Boundary::dirichlet) {
    throw ConfigError("relativistic shooting needs a dirichlet line grid");
  }
  const double hc = s.units.hbar * s.units.c;
  const UnitSystem units = s.units;
  auto k2 = [units, hc](double e, double v) { return local_coefficient(e, v, units) / (hc * hc); };
  std::optional<shooting::MatchingFunction> f;
  if (options.model == ShootingOptions::Model::lattice) {
    f = shooting::MatchingFunction::lattice(s.grid, sample(s.potential, s.grid), k2);
  } else {
    if (!s.potential.is_piecewise_constant()) {
      throw ConfigError("continuum shooting needs a piecewise-constant potential, got " + s.potential.type_name());
    }
    f = shooting::MatchingFunction::continuum(regions(s.potential, s.grid.x_min(), s.grid.x_max()), k2);
  }
  shooting::ScanOptions scan;
  scan.scan_points = options.scan_points;
  const shooting::RootScan roots = shooting::find_roots(*f, e_lo, e_hi, scan);

  std::vector<ModifiedEigenResult> out;
  for (std::size_t k = 0; k < roots.roots.size(); ++k) {
    ModifiedEigenResult r(s.grid);
    r.method = modified_nr::Method::shooting;
    r.energy = roots.roots[k];
    r.node_count = roots.node_counts[k];
    r.iterations = roots.evaluations;
    r.state = f->state(r.energy, s.grid);
    out.push_back(std::move(r));
  }
  return out;
}

ModifiedEigenResult solve_rel_stationary(const RelScenario& s, double e_lo, double e_hi,
                                         const ShootingOptions& options) {
  auto all = rel_spectrum(s, e_lo, e_hi, options);
  if (options.node_count) {
    for (auto& r : all) {
      if (r.node_count == *options.node_count) return std::move(r);
    }
    throw NoRootError("no root with " + std::to_string(*options.node_count) + " nodes in the bracket");
  }
  if (all.empty()) {
    throw NoRootError("matching function has no sign change in [" + format_number(e_lo) + ", " +
                      format_number(e_hi) + "]");
  }
  return std::move(all.front());
}

namespace {

std::vector<double> inverse_factor_squared(const RelScenario& s) {
  const double e0 = s.units.rest_energy();
  std::vector<double> a = sample(s.potential, s.grid);
  for (double& x : a) {
    const double f = 1.0 + x / e0;
    x = 1.0 / (f * f);
  }
  return a;
}

}  // namespace

double max_stable_dt(const RelScenario& s) {
  const std::vector<double> a = inverse_factor_squared(s);
  const double h = s.grid.spacing();
  const double c = s.units.c;
  const double m = s.units.rest_energy() / s.units.hbar;
  const double omega2 = *std::max_element(a.begin(), a.end()) * (4.0 * c * c / (h * h) + m * m);
  return 0.9 * 2.0 / std::sqrt(omega2);
}

Trajectory propagate_rel_timedep(const WaveField& phi0, const WaveField& dphi0_dt, const RelScenario& s,
                                 double dt, std::size_t steps, std::size_t frame_stride) {
  validate(s);
  const Grid& grid = s.grid;
  if (!(phi0.grid == grid) || !(dphi0_dt.grid == grid)) throw UsageError("initial data must live on the scenario grid");
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (frame_stride == 0) throw ConfigError("frame stride must be >= 1");
  const double limit = max_stable_dt(s);
  if (dt > limit) {
    throw ConfigError("dt = " + format_number(dt) + " exceeds the leapfrog stability bound " +
                      format_number(limit));
  }
  const std::vector<double> a = inverse_factor_squared(s);
  const BandedOperator lap = build_laplacian(grid, 2);
  const double c2 = s.units.c * s.units.c;
  const double m = s.units.rest_energy() / s.units.hbar;
  const double m2 = m * m;
  const std::size_t n = grid.size();

  // Phi_tt at every active node.
  auto accel = [&](const WaveField& phi) {
    const std::vector<complex> l = lap.apply(std::span<const complex>(phi.values));
    std::vector<complex> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (grid.is_active(i)) out[i] = (c2 * l[i] - m2 * phi[i]) * a[i];
    }
    return out;
  };

  WaveField prev = phi0;
  WaveField cur(grid);
  {
    const auto acc = accel(prev);
    for (std::size_t i = 0; i < n; ++i) {
      if (grid.is_active(i)) {
        cur[i] = prev[i] + dt * dphi0_dt[i] + 0.5 * dt * dt * acc[i];
      } else {
        prev[i] = 0.0;
      }
    }
  }

  Trajectory traj;
  traj.times.push_back(0.0);
  traj.frames.push_back(prev);
  traj.norms.push_back(norm(prev));
  const double initial_norm = traj.norms.front();
  for (std::size_t step = 1; step <= steps; ++step) {
    traj.norms.push_back(norm(cur));
    if (initial_norm > 0.0 &&
        (!std::isfinite(traj.norms.back()) || traj.norms.back() > 10.0 * initial_norm)) {
      throw StabilityError("field norm grew beyond 10x its initial value at step " + std::to_string(step) +
                           "; reduce dt");
    }
    if (step % frame_stride == 0 || step == steps) {
      traj.times.push_back(static_cast<double>(step) * dt);
      traj.frames.push_back(cur);
    }
    if (step == steps) break;
    const auto acc = accel(cur);
    WaveField next(grid);
    for (std::size_t i = 0; i < n; ++i) {
      if (grid.is_active(i)) next[i] = 2.0 * cur[i] - prev[i] + dt * dt * acc[i];
    }
    prev = std::move(cur);
    cur = std::move(next);
  }
  double drift = 0.0;
  for (double v : traj.norms) drift = std::max(drift, std::abs(v - initial_norm));
  traj.diagnostics["norm_drift"] = initial_norm > 0.0 ? drift / initial_norm : drift;
  traj.diagnostics["dt_limit"] = limit;
  traj.diagnostics["epsilon_definition_conflict"] = epsilon_definition_conflict(s) ? 1.0 : 0.0;
  return traj;
}

double electrostatic_invariant_potential(double phi, double epsilon, double charge, const UnitSystem& units,
                                         double vector_potential) {
  if (vector_potential != 0.0) {
    throw OutOfScopeError("nonzero vector potential: only the electrostatic reduction (A = 0) is implemented");
  }
  units.validate();
  return charge * epsilon * phi / units.rest_energy();
}

}  // namespace wavekit::modified_rel
