#include "wavekit/modified_nr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "wavekit/errors.hpp"
#include "wavekit/linalg.hpp"

namespace wavekit::modified_nr {

namespace {

double energy_scale(double energy, const std::vector<double>& v) {
  double scale = std::abs(energy);
  for (double x : v) scale = std::max(scale, std::abs(x));
  return scale > 0.0 ? scale : 1.0;
}

bool identically_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

// Drop zeros of E - V that sit where V itself vanishes: W = 0 there for any E.
SingularSet relevant(SingularSet set, const PotentialSpec& potential) {
  std::erase_if(set.locations, [&](double x) { return evaluate(potential, x) == 0.0; });
  return set;
}

std::string format_locations(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size() && i < 8; ++i) {
    if (i) s += ", ";
    s += format_number(xs[i]);
  }
  if (xs.size() > 8) s += ", ...";
  return s;
}

BandedOperator modified_operator(const Grid& grid, const std::vector<double>& w, const UnitSystem& units,
                                 int order) {
  const double kinetic = -units.hbar * units.hbar / (2.0 * units.m);
  const BandedOperator lap =
      grid.kind() == GridKind::radial ? build_radial_laplacian(grid, 0) : build_laplacian(grid, order);
  return lap.scaled(kinetic).plus_diagonal(w);
}

WaveField embed(const Grid& grid, const std::vector<double>& v) {
  WaveField psi(grid);
  double peak = 0.0;
  for (double x : v) peak = std::max(peak, std::abs(x));
  double sign = 1.0;
  for (double x : v) {
    if (std::abs(x) > 1e-3 * peak) {
      sign = x > 0 ? 1.0 : -1.0;
      break;
    }
  }
  for (std::size_t i = 0; i < v.size(); ++i) psi[grid.active_begin() + i] = sign * v[i];
  return normalized(std::move(psi));
}

}  // namespace

const char* to_string(Method method) { return method == Method::fixed_point ? "fixed_point" : "shooting"; }

double local_coefficient(double energy, double potential) {
  const double den = energy - potential;
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double num = energy - 2.0 * potential;
  return num * num / den;
}

std::vector<double> effective_potential(const PotentialSpec& potential, double energy, const Grid& grid,
                                        const Regularization& guard) {
  if (!std::isfinite(energy)) throw DomainError("energy must be finite");
  check_covers(potential, grid);
  const std::vector<double> v = sample(potential, grid);
  const double floor = guard.floor > 0.0 ? guard.floor : 1e-6 * energy_scale(energy, v);

  if (guard.mode == Regularization::Mode::reject) {
    SingularSet set = relevant(find_singular_set(potential, energy, SingularKind::E_equals_V, grid), potential);
    // Nodes inside the floor count on their own only when no zero lies within a spacing.
    const std::vector<double> zeros = set.locations;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == 0.0 || std::abs(energy - v[i]) >= floor) continue;
      const bool covered = std::any_of(zeros.begin(), zeros.end(),
                                       [&](double z) { return std::abs(z - grid.x(i)) <= grid.spacing(); });
      if (!covered) set.locations.push_back(grid.x(i));
    }
    if (!set.empty()) {
      std::sort(set.locations.begin(), set.locations.end());
      const std::string what =
          "E - V(x) vanishes at x = " + format_locations(set.locations) + " for E = " + format_number(energy);
      throw SingularRegionError(what, std::move(set));
    }
  }

  std::vector<double> w(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == 0.0) continue;
    double den = energy - v[i];
    if (std::abs(den) < floor) den = std::copysign(floor, den);
    w[i] = 3.0 * v[i] - v[i] * v[i] / den;
  }
  return w;
}

ModifiedEigenResult solve_stationary_fixed_point(const Grid& grid, const PotentialSpec& potential,
                                                 std::size_t state_index, double energy_init, double tol,
                                                 std::size_t max_iter, const UnitSystem& units,
                                                 const FixedPointOptions& options) {
  units.validate();
  if (!(options.damping > 0.0 && options.damping <= 1.0)) throw ConfigError("damping must lie in (0, 1]");
  if (!(tol > 0.0)) throw ConfigError("tolerance must be > 0");
  if (max_iter == 0) throw ConfigError("max_iter must be >= 1");
  if (state_index >= grid.active_size()) throw ConfigError("state_index exceeds the grid unknowns");
  if (!std::isfinite(energy_init)) throw ConfigError("initial energy must be finite");

  const std::vector<double> v = sample(potential, grid);
  const bool linear = identically_zero(v);
  const std::size_t last = std::min(grid.active_size() - 1, state_index + 3);

  ModifiedEigenResult out(grid);
  out.method = Method::fixed_point;
  double energy = energy_init;
  out.history.push_back(energy);

  // Eigenpair of H(E) with state_index nodes, preferring the index-ordered candidate.
  auto tracked = [&](double e) {
    const std::vector<double> w = effective_potential(potential, e, grid, options.guard);
    const BandedOperator h = modified_operator(grid, w, units, options.order);
    const std::size_t first = state_index >= 3 ? state_index - 3 : 0;
    const linalg::EigenPairs pairs = linalg::eigenpairs_by_index(h.active_matrix(), first, last);
    const std::size_t preferred = state_index - first;
    std::vector<std::size_t> order{preferred};
    for (std::size_t k = 0; k < pairs.values.size(); ++k) {
      if (k != preferred) order.push_back(k);
    }
    for (std::size_t k : order) {
      WaveField psi = embed(grid, pairs.vectors[k]);
      if (count_nodes(psi) == state_index) return std::make_pair(pairs.values[k], std::move(psi));
    }
    throw StateTrackingError("no eigenvector of H(E) with " + std::to_string(state_index) +
                                 " nodes at E = " + format_number(e),
                             out.history);
  };
  auto damped = [&](double e, double eig) { return (1.0 - options.damping) * e + options.damping * eig; };

  const bool newton = options.acceleration == Acceleration::newton;
  // Last accepted Newton iterate; a step that does not lower |eig(E) - E| is halved back towards it.
  double base = energy, base_residual = std::numeric_limits<double>::infinity(), step = 0.0;
  std::size_t solves = 0;
  while (solves < max_iter) {
    ++solves;
    std::pair<double, WaveField> candidate{0.0, WaveField(grid)};
    try {
      candidate = tracked(energy);
    } catch (const StateTrackingError&) {
      if (!newton || !std::isfinite(base_residual)) throw;
      step *= 0.5;
      energy = base + step;
      out.history.push_back(energy);
      continue;
    }
    auto& [eig, psi] = candidate;
    const double residual = std::abs(eig - energy);
    if (linear || residual <= tol) {
      out.energy = linear ? eig : energy;
      out.state = std::move(psi);
      out.iterations = solves;
      out.self_consistency_residual = linear ? 0.0 : residual;
      out.node_count = state_index;
      if (linear) out.history.push_back(eig);
      return out;
    }
    if (newton && !(residual < base_residual) && std::isfinite(base_residual)) {
      step *= 0.5;
      energy = base + step;
      out.history.push_back(energy);
      continue;
    }
    base = energy;
    base_residual = residual;
    double next = damped(energy, eig);
    if (newton) {
      // d eig/dE = <psi| V^2/(E - V)^2 |psi> by Hellmann-Feynman. The step is capped
      // at half the distance to the nearest E = V(x_i) so W keeps its branch.
      double slope = 0.0, reach = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!grid.is_active(i) || v[i] == 0.0) continue;
        const double d = energy - v[i];
        slope += std::norm(psi[i]) * v[i] * v[i] / (d * d);
        reach = std::min(reach, std::abs(d));
      }
      slope *= grid.spacing();
      const double r = eig - energy;
      if (slope != 1.0) {
        double dx = -r / (slope - 1.0);
        if (std::abs(dx) > 0.5 * reach) dx = std::copysign(0.5 * reach, dx);
        next = energy + dx;
      }
    }
    step = next - energy;
    energy = next;
    out.history.push_back(energy);
    if (!std::isfinite(energy)) break;
  }
  throw NonConvergenceError("fixed point did not reach |eig(E) - E| <= " + format_number(tol) + " in " +
                                std::to_string(max_iter) + " eigen-solves",
                            out.history);
}

shooting::MatchingFunction matching_function(const Grid& grid, const PotentialSpec& potential,
                                             const UnitSystem& units, ShootingOptions::Model model) {
  units.validate();
  if (!potential.is_piecewise_constant()) {
    throw ConfigError("shooting needs a piecewise-constant potential, got " + potential.type_name());
  }
  if (grid.kind() != GridKind::line || grid.boundary() != Boundary::dirichlet) {
    throw ConfigError("shooting needs a dirichlet line grid");
  }
  const double factor = 2.0 * units.m / (units.hbar * units.hbar);
  auto k2 = [factor](double e, double v) { return factor * local_coefficient(e, v); };
  if (model == ShootingOptions::Model::lattice) {
    return shooting::MatchingFunction::lattice(grid, sample(potential, grid), k2);
  }
  return shooting::MatchingFunction::continuum(regions(potential, grid.x_min(), grid.x_max()), k2);
}

std::vector<double> singular_energies(const PotentialSpec& potential, const Grid& grid) {
  std::vector<double> out;
  for (const Region& r : regions(potential, grid.x_min(), grid.x_max())) out.push_back(r.value);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<ModifiedEigenResult> shooting_spectrum(const Grid& grid, const PotentialSpec& potential, double e_lo,
                                                   double e_hi, const UnitSystem& units,
                                                   const ShootingOptions& options) {
  const auto f = matching_function(grid, potential, units, options.model);
  const std::vector<double> excluded = singular_energies(potential, grid);
  for (double e : {e_lo, e_hi}) {
    if (std::find(excluded.begin(), excluded.end(), e) != excluded.end()) {
      throw ConfigError("energy bracket endpoint " + format_number(e) + " is singular (E = V)");
    }
  }
  shooting::ScanOptions scan;
  scan.scan_points = options.scan_points;
  scan.excluded = excluded;
  const shooting::RootScan roots = shooting::find_roots(f, e_lo, e_hi, scan);

  std::vector<ModifiedEigenResult> out;
  const Regularization clamp{Regularization::Mode::clamp, 0.0};
  for (std::size_t k = 0; k < roots.roots.size(); ++k) {
    ModifiedEigenResult r(grid);
    r.method = Method::shooting;
    r.energy = roots.roots[k];
    r.node_count = roots.node_counts[k];
    r.iterations = roots.evaluations;
    r.skipped = roots.skipped;
    r.state = f.state(r.energy, grid);
    // Rayleigh mismatch of the sampled state against the grid operator H(E*).
    const BandedOperator h = modified_operator(grid, effective_potential(potential, r.energy, grid, clamp),
                                               units, 2);
    r.self_consistency_residual = std::abs(inner_product(r.state, h.apply(r.state)).real() - r.energy);
    out.push_back(std::move(r));
  }
  return out;
}

ModifiedEigenResult solve_stationary_shooting(const Grid& grid, const PotentialSpec& potential, double e_lo,
                                              double e_hi, const UnitSystem& units,
                                              const ShootingOptions& options) {
  auto all = shooting_spectrum(grid, potential, e_lo, e_hi, units, options);
  if (options.node_count) {
    for (auto& r : all) {
      if (r.node_count == *options.node_count) return std::move(r);
    }
    throw NoRootError("no root with " + std::to_string(*options.node_count) + " nodes in [" +
                      format_number(e_lo) + ", " + format_number(e_hi) + "]");
  }
  if (all.empty()) {
    throw NoRootError("matching function has no sign change in [" + format_number(e_lo) + ", " +
                      format_number(e_hi) + "]");
  }
  return std::move(all.front());
}

AdditionalTermReport additional_term_report(const WaveField& psi_ref, double energy_ref,
                                            const PotentialSpec& potential, const UnitSystem& units) {
  units.validate();
  const Grid& grid = psi_ref.grid;
  if (std::abs(norm(psi_ref) - 1.0) > 1e-6) throw UsageError("reference state must be normalized");
  if (!std::isfinite(energy_ref)) throw DomainError("reference energy must be finite");
  check_covers(potential, grid);

  AdditionalTermReport rep;
  const std::vector<double> v = sample(potential, grid);
  std::vector<double> rho(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) rho[i] = std::norm(psi_ref[i]);

  std::vector<double> f(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) f[i] = -2.0 * v[i] * rho[i];
  rep.minus_2V_part = integrate(grid, f);

  if (identically_zero(v)) {
    rep.shift_ratio = 0.0;
    return rep;
  }

  // Cubic B-spline of the density on the uniform nodes, including the radial origin
  // and the periodic wrap point.
  std::vector<double> knots;
  double t0 = grid.x_min();
  if (grid.kind() == GridKind::radial) {
    knots.push_back(0.0);
    t0 = 0.0;
  }
  knots.insert(knots.end(), rho.begin(), rho.end());
  if (grid.boundary() == Boundary::periodic) knots.push_back(rho.front());
  const double a = t0;
  const double b = t0 + grid.spacing() * static_cast<double>(knots.size() - 1);
  boost::math::interpolators::cardinal_cubic_b_spline<double> density(knots.begin(), knots.end(), t0,
                                                                      grid.spacing());
  auto integrand = [&](double x) {
    const double vx = evaluate(potential, x);
    if (vx == 0.0) return 0.0;
    return density(x) * vx * vx / (energy_ref - vx);
  };
  // The spline is only C2 at its knots, so each knot cell is integrated on its own;
  // cells next to a pole are cut into pieces whose distance to it doubles.
  auto gauss = [&](double lo, double hi) {
    return boost::math::quadrature::gauss<double, 15>::integrate(integrand, lo, hi);
  };
  auto quad = [&](double lo, double hi) {
    if (!(hi > lo)) return 0.0;
    const double h = grid.spacing();
    double sum = 0.0;
    double x = lo;
    while (x < hi) {
      double next = t0 + (std::floor((x - t0) / h) + 1.0) * h;
      if (next - x < 1e-9 * h) next += h;
      next = std::min(hi, next);
      double pole = std::numeric_limits<double>::quiet_NaN(), gap = std::numeric_limits<double>::infinity();
      for (double x0 : rep.poles.locations) {
        const double d = std::min(std::abs(x - x0), std::abs(next - x0));
        if (d < gap) gap = d, pole = x0;
      }
      if (gap >= h || gap <= 0.0) {
        sum += gauss(x, next);
      } else {
        const double side = next <= pole ? -1.0 : 1.0;
        const double far = std::max(std::abs(x - pole), std::abs(next - pole));
        for (double d = gap; d < far; d *= 2.0) {
          const double e = std::min(2.0 * d, far);
          sum += side < 0 ? gauss(pole - e, pole - d) : gauss(pole + d, pole + e);
        }
      }
      x = next;
    }
    return sum;
  };

  rep.poles = relevant(find_singular_set(potential, energy_ref, SingularKind::E_equals_V, grid), potential);
  rep.pv_flag = !rep.poles.empty();
  auto breakpoints = [&](double delta) {
    std::vector<std::pair<double, double>> pieces;
    double lo = a;
    for (double x0 : rep.poles.locations) {
      pieces.emplace_back(lo, x0 - delta);
      lo = x0 + delta;
    }
    pieces.emplace_back(lo, b);
    return pieces;
  };
  auto excised = [&](double delta) {
    double sum = 0.0;
    for (const auto& [lo, hi] : breakpoints(delta)) sum += quad(lo, hi);
    return sum;
  };

  if (!rep.pv_flag) {
    rep.pv_part = excised(0.0);
  } else {
    double gap = std::min(rep.poles.locations.front() - a, b - rep.poles.locations.back());
    for (std::size_t i = 1; i < rep.poles.locations.size(); ++i) {
      gap = std::min(gap, 0.5 * (rep.poles.locations[i] - rep.poles.locations[i - 1]));
    }
    double delta = std::min(0.25 * gap, 0.05 * (b - a));
    double prev = excised(delta);
    rep.excision_radii.push_back(delta);
    rep.excision_values.push_back(prev);
    rep.pv_converged = false;
    for (int halving = 0; halving < 50; ++halving) {
      delta *= 0.5;
      const double cur = excised(delta);
      rep.excision_radii.push_back(delta);
      rep.excision_values.push_back(cur);
      const bool stable = std::abs(cur - prev) <= 1e-6 * std::abs(cur);
      prev = cur;
      if (stable) {
        rep.pv_converged = true;
        break;
      }
    }
    rep.pv_part = prev;
  }
  rep.first_order_shift = rep.minus_2V_part + rep.pv_part;
  rep.shift_ratio = energy_ref != 0.0 ? std::abs(rep.first_order_shift / energy_ref)
                                      : std::numeric_limits<double>::infinity();
  return rep;
}

namespace {

// (eps^2/2m) (E - V)/(E - 2V)^2 per node, rejecting E = 2V.
std::vector<double> speed_field(const PotentialSpec& potential, double energy, double epsilon, const Grid& grid,
                                const UnitSystem& units) {
  check_covers(potential, grid);
  SingularSet zeros = find_singular_set(potential, energy, SingularKind::E_equals_2V, grid);
  const std::vector<double> v = sample(potential, grid);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (energy - 2.0 * v[i] == 0.0) zeros.locations.push_back(grid.x(i));
  }
  if (!zeros.empty()) {
    std::sort(zeros.locations.begin(), zeros.locations.end());
    const std::string what =
        "coefficient (E - V)/(E - 2V)^2 is singular where E = 2V(x), x = " + format_locations(zeros.locations);
    throw SingularRegionError(what, std::move(zeros));
  }
  const double pre = epsilon * epsilon / (2.0 * units.m);
  std::vector<double> s(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = energy - 2.0 * v[i];
    s[i] = pre * (energy - v[i]) / (d * d);
  }
  return s;
}

}  // namespace

std::vector<double> wave_speed_squared(const PotentialSpec& potential, double energy, double epsilon,
                                       const Grid& grid, const UnitSystem& units) {
  std::vector<double> s = speed_field(potential, energy, epsilon, grid, units);
  std::vector<double> offending;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (grid.is_active(i) && !(s[i] > 0.0)) offending.push_back(grid.x(i));
  }
  if (!offending.empty()) {
    throw NonHyperbolicError("s(x) <= 0 (E <= V or eps = 0) at " + std::to_string(offending.size()) +
                                 " nodes in [" + format_number(offending.front()) + ", " +
                                 format_number(offending.back()) + "]",
                             offending);
  }
  return s;
}

double max_stable_dt(const std::vector<double>& speed2, const Grid& grid) {
  const double top = *std::max_element(speed2.begin(), speed2.end());
  return 0.9 * grid.spacing() / std::sqrt(top);
}

Trajectory propagate_timedep(const TimeDepState& state0, const PotentialSpec& potential, double dt,
                             std::size_t steps, const UnitSystem& units, std::size_t frame_stride) {
  units.validate();
  const Grid& grid = state0.psi.grid;
  if (!(state0.dpsi_dt.grid == grid)) throw UsageError("psi and dpsi/dt must share one grid");
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (frame_stride == 0) throw ConfigError("frame stride must be >= 1");
  const std::vector<double> s = wave_speed_squared(potential, state0.energy, state0.epsilon, grid, units);
  const double limit = max_stable_dt(s, grid);
  if (dt > limit) {
    throw ConfigError("dt = " + format_number(dt) + " exceeds the leapfrog stability bound " +
                      format_number(limit));
  }
  const BandedOperator lap = build_laplacian(grid, 2);
  const std::size_t n = grid.size();

  auto lap_of = [&](const WaveField& f) { return lap.apply(std::span<const complex>(f.values)); };
  auto clean = [&](WaveField f) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!grid.is_active(i)) f[i] = 0.0;
    }
    return f;
  };
  // sum h (|psi_t|^2 / s - conj(psi) lap psi), conserved by psi_tt = s lap psi.
  auto wave_energy = [&](const WaveField& psi, const std::vector<complex>& psi_t) {
    const std::vector<complex> l = lap_of(psi);
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!grid.is_active(i)) continue;
      e += std::norm(psi_t[i]) / s[i] - (std::conj(psi[i]) * l[i]).real();
    }
    return e * grid.spacing();
  };

  WaveField prev = clean(state0.psi);
  const WaveField v0 = clean(state0.dpsi_dt);
  WaveField cur(grid);
  {
    const std::vector<complex> l = lap_of(prev);
    for (std::size_t i = 0; i < n; ++i) {
      if (grid.is_active(i)) cur[i] = prev[i] + dt * v0[i] + 0.5 * dt * dt * s[i] * l[i];
    }
  }

  Trajectory traj;
  traj.times.push_back(state0.t);
  traj.frames.push_back(prev);
  traj.norms.push_back(norm(prev));
  const double e0 = wave_energy(prev, v0.values);
  double drift = 0.0;

  std::vector<complex> velocity(n);
  for (std::size_t step = 1; step <= steps; ++step) {
    traj.norms.push_back(norm(cur));
    if (step % frame_stride == 0 || step == steps) {
      traj.times.push_back(state0.t + static_cast<double>(step) * dt);
      traj.frames.push_back(cur);
    }
    if (step == steps) break;
    const std::vector<complex> l = lap_of(cur);
    WaveField next(grid);
    for (std::size_t i = 0; i < n; ++i) {
      if (grid.is_active(i)) next[i] = 2.0 * cur[i] - prev[i] + dt * dt * s[i] * l[i];
    }
    for (std::size_t i = 0; i < n; ++i) velocity[i] = (next[i] - prev[i]) / (2.0 * dt);
    const double e = wave_energy(cur, velocity);
    if (e0 != 0.0) drift = std::max(drift, std::abs(e - e0) / std::abs(e0));
    if (!std::isfinite(traj.norms.back())) throw StabilityError("leapfrog field became non-finite; reduce dt");
    prev = std::move(cur);
    cur = std::move(next);
  }
  traj.diagnostics["energy_drift"] = drift;
  traj.diagnostics["dt_limit"] = limit;
  return traj;
}

std::complex<double> time_factor(double epsilon, std::complex<double> b1, std::complex<double> b2, double t,
                                 const UnitSystem& units) {
  const double w = epsilon * t / units.hbar;
  const std::complex<double> ph(std::cos(w), std::sin(w));
  return b1 * ph + b2 * std::conj(ph);
}

WaveField separated_solution(const WaveField& psi_n, double epsilon, std::complex<double> b1,
                             std::complex<double> b2, double t, const UnitSystem& units) {
  const std::complex<double> f = time_factor(epsilon, b1, b2, t, units);
  WaveField out = psi_n;
  for (auto& v : out.values) v *= f;
  return out;
}

double separation_constant(double epsilon, const UnitSystem& units) {
  return -epsilon * epsilon / (units.hbar * units.hbar);
}

double time_factor_residual(double epsilon, std::complex<double> b1, std::complex<double> b2, double t, double dt,
                            const UnitSystem& units) {
  auto f = [&](double s) { return time_factor(epsilon, b1, b2, s, units); };
  const std::complex<double> d2 =
      (-f(t + 2 * dt) + 16.0 * f(t + dt) - 30.0 * f(t) + 16.0 * f(t - dt) - f(t - 2 * dt)) / (12.0 * dt * dt);
  const double w = epsilon / units.hbar;
  return std::abs(d2 + w * w * f(t));
}

double recover_separation_constant(const WaveField& psi_n, const PotentialSpec& potential, double energy,
                                   double epsilon, const UnitSystem& units) {
  const Grid& grid = psi_n.grid;
  const std::vector<double> s = speed_field(potential, energy, epsilon, grid, units);
  const BandedOperator lap =
      grid.kind() == GridKind::radial ? build_radial_laplacian(grid, 0) : build_laplacian(grid, 2);
  const std::vector<complex> l = lap.apply(std::span<const complex>(psi_n.values));
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.is_active(i)) continue;
    num += s[i] * (std::conj(psi_n[i]) * l[i]).real();
    den += std::norm(psi_n[i]);
  }
  if (den == 0.0) throw DomainError("separated state is identically zero");
  return num / den;
}

}  // namespace wavekit::modified_nr
