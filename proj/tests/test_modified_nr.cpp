#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "wavekit/modified_nr.hpp"
#include "wavekit/reference.hpp"

using namespace wavekit;
using namespace wavekit::modified_nr;

namespace {

const double pi = std::numbers::pi;

FixedPointOptions newton() {
  FixedPointOptions o;
  o.acceleration = Acceleration::newton;
  return o;
}

// Eigenvalues of -hbar^2/2m lap + W(E) assembled here from the stencil pieces.
std::vector<double> linear_levels(const Grid& grid, const PotentialSpec& v, double energy, std::size_t n,
                                  const UnitSystem& u) {
  const auto w = effective_potential(v, energy, grid);
  const BandedOperator h = build_laplacian(grid, 2).scaled(-u.hbar * u.hbar / (2.0 * u.m)).plus_diagonal(w);
  return reference::lowest_states(h, n).energies;
}

}  // namespace

TEST_SUITE("modified_nr") {

TEST_CASE("effective potential") {
  const Grid g = Grid::line(-2, 2, 41);
  for (double w : effective_potential(PotentialSpec::free(), 0.7, g)) CHECK(w == 0.0);

  const auto well = PotentialSpec::square_well(10.0, 1.0);
  const auto w = effective_potential(well, -4.0, g);
  CHECK(w[20] == doctest::Approx(-30.0 - 100.0 / 6.0));
  CHECK(w[20] == doctest::Approx(-46.6667).epsilon(1e-5));
  CHECK(w[0] == 0.0);
  // the form reproduces (E - 2V)^2/(E - V) = E - W
  CHECK(-4.0 - w[20] == doctest::Approx(local_coefficient(-4.0, -10.0)));
  CHECK(std::isnan(local_coefficient(1.0, 1.0)));
}

TEST_CASE("effective potential surfaces turning points") {
  const Grid g = Grid::line(-4, 4, 401);
  const auto osc = PotentialSpec::harmonic(1.0);
  const double e = 0.5;
  try {
    effective_potential(osc, e, g);
    FAIL("expected a singular region");
  } catch (const SingularRegionError& err) {
    const auto& loc = err.singular_set().locations;
    REQUIRE(loc.size() == 2);
    CHECK(loc[0] == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(loc[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(err.kind() == ErrorKind::singular_region);
  }
  const auto clamped = effective_potential(osc, e, g, {Regularization::Mode::clamp, 1e-3});
  for (double w : clamped) CHECK(std::isfinite(w));
  CHECK_THROWS_AS(effective_potential(osc, std::nan(""), g), DomainError);
}

TEST_CASE("fixed point reduces to the Schrodinger problem at V = 0") {
  const UnitSystem u;
  const Grid g = Grid::line(0.0, pi, 400);
  const auto ref = reference::solve_schrodinger_stationary(g, PotentialSpec::free(), 5, u);
  for (std::size_t k = 0; k < 5; ++k) {
    const auto r = solve_stationary_fixed_point(g, PotentialSpec::free(), k, 3.0, 1e-12, 50, u);
    CHECK(std::abs(r.energy - ref.energies[k]) <= 1e-12);
    CHECK(r.iterations == 1);
    CHECK(r.node_count == k);
  }
  const auto ground = solve_stationary_fixed_point(g, PotentialSpec::free(), 0, 0.1, 1e-12, 50, u);
  CHECK(ground.energy == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("fixed point on a square well is self-consistent and matches shooting") {
  const UnitSystem u;
  const Grid g = Grid::line(-3, 3, 601);
  const auto well = PotentialSpec::square_well(10.0, 1.0);
  ShootingOptions lattice;
  lattice.model = ShootingOptions::Model::lattice;
  // Node counts grow towards E = -V0; the lowest state has the fewest nodes.
  const auto roots = shooting_spectrum(g, well, -9.0, -1e-6, u, lattice);
  REQUIRE(roots.size() >= 2);
  const auto& shot = roots.back();
  CHECK(shot.node_count < roots.front().node_count);
  const auto fp =
      solve_stationary_fixed_point(g, well, shot.node_count, shot.energy + 0.2, 1e-11, 200, u, newton());
  CHECK(std::abs(fp.energy - shot.energy) <= 1e-8);
  CHECK(fp.self_consistency_residual <= 1e-11);
  CHECK(count_nodes(fp.state) == shot.node_count);
  // Re-solving the linear problem at E* returns E* again.
  const auto levels = linear_levels(g, well, fp.energy, shot.node_count + 3, u);
  double best = 1e300;
  for (double e : levels) best = std::min(best, std::abs(e - fp.energy));
  CHECK(best <= 1e-10);

  const auto again = solve_stationary_fixed_point(g, well, shot.node_count, fp.energy, 1e-9, 50, u, newton());
  CHECK(again.iterations == 1);
  CHECK(again.self_consistency_residual <= 1e-9);
}

TEST_CASE("fixed point failures carry the iterate history") {
  const UnitSystem u;
  const Grid g = Grid::line(-3, 3, 301);
  const auto well = PotentialSpec::square_well(10.0, 1.0);
  try {
    solve_stationary_fixed_point(g, well, 0, -5.0, 1e-12, 2, u, newton());
    FAIL("expected non-convergence");
  } catch (const NonConvergenceError& e) {
    CHECK(e.history().size() == 3);
    CHECK(e.history().front() == -5.0);
  }
  CHECK_THROWS_AS(solve_stationary_fixed_point(g, well, 0, -5.0, 1e-12, 10, u, FixedPointOptions{0.0}),
                  ConfigError);
  CHECK_THROWS_AS(solve_stationary_fixed_point(g, well, 0, -5.0, 0.0, 10, u), ConfigError);
}

TEST_CASE("shooting on an empty box gives the infinite-well energies") {
  UnitSystem u;
  u.m = 2.0;
  const double width = 2.0;
  const Grid g = Grid::line(0.0, width, 201);
  const auto roots = shooting_spectrum(g, PotentialSpec::free(), 0.1, 12.0, u);
  REQUIRE(roots.size() >= 4);
  for (std::size_t k = 0; k < 4; ++k) {
    const double n = static_cast<double>(k + 1);
    CHECK(roots[k].energy == doctest::Approx(n * n * pi * pi / (2.0 * u.m * width * width)).epsilon(1e-10));
    CHECK(roots[k].node_count == k);
  }
}

TEST_CASE("shooting root count matches a dense scan") {
  const UnitSystem u;
  const Grid g = Grid::line(-3, 3, 601);
  const auto well = PotentialSpec::square_well(10.0, 1.0);
  const double lo = -9.0, hi = -1e-6;
  for (auto model : {ShootingOptions::Model::continuum, ShootingOptions::Model::lattice}) {
    ShootingOptions opts;
    opts.model = model;
    const auto roots = shooting_spectrum(g, well, lo, hi, u, opts);
    const auto f = matching_function(g, well, u, model);
    CHECK(roots.size() == shooting::count_sign_changes(f, lo, hi, 10000, singular_energies(well, g)));
    CHECK(!roots.empty());
  }
}

TEST_CASE("shooting reports a bracket without roots") {
  const UnitSystem u;
  const Grid g = Grid::line(-3, 3, 301);
  const auto shallow = PotentialSpec::square_well(0.5, 0.2);
  CHECK_THROWS_AS(solve_stationary_shooting(g, shallow, -0.1, -0.01, u), NoRootError);
  CHECK_THROWS_AS(solve_stationary_shooting(g, shallow, -0.5, -0.01, u), ConfigError);
  CHECK_THROWS_AS(solve_stationary_shooting(g, PotentialSpec::harmonic(1.0), 0.1, 1.0, u), ConfigError);
}

TEST_CASE("additional term") {
  const UnitSystem u;
  const Grid box = Grid::line(0, 1, 101);
  const auto ref = reference::solve_schrodinger_stationary(box, PotentialSpec::free(), 1, u);
  const auto none = additional_term_report(ref.states[0], ref.energies[0], PotentialSpec::free(), u);
  CHECK(none.minus_2V_part == 0.0);
  CHECK(none.pv_part == 0.0);
  CHECK(none.first_order_shift == 0.0);
  CHECK_FALSE(none.pv_flag);

  WaveField doubled = ref.states[0];
  for (auto& v : doubled.values) v *= 2.0;
  CHECK_THROWS_AS(additional_term_report(doubled, 1.0, PotentialSpec::free(), u), UsageError);

  const Grid r = Grid::radial(40.0, 8000);
  const auto h = reference::solve_schrodinger_stationary(r, PotentialSpec::coulomb(1.0), 1, u);
  const auto rep = additional_term_report(h.states[0], -0.5, PotentialSpec::coulomb(1.0), u);
  // <-2V> = 2 <1/r> = 2 for the 1s state.
  CHECK(rep.minus_2V_part == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(rep.pv_flag);
  REQUIRE(rep.poles.locations.size() == 1);
  CHECK(rep.poles.locations[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(rep.pv_converged);
  CHECK(rep.excision_values.size() >= 2);
  CHECK(rep.first_order_shift == doctest::Approx(rep.minus_2V_part + rep.pv_part));
  CHECK(rep.shift_ratio == doctest::Approx(std::abs(rep.first_order_shift) / 0.5));
}

TEST_CASE("time-dependent free plane wave") {
  const UnitSystem u;
  const double p = 2.0;
  const Grid g = Grid::line(0, 2 * pi, 512, Boundary::periodic);
  const double eps = p * p / 2.0;
  TimeDepState s0{WaveField(g), WaveField(g), 0.0, eps, eps};
  for (std::size_t i = 0; i < g.size(); ++i) {
    s0.psi[i] = std::polar(1.0, p * g.x(i));
    s0.dpsi_dt[i] = complex(0, -eps) * s0.psi[i];
  }
  const auto speed = wave_speed_squared(PotentialSpec::free(), eps, eps, g, u);
  CHECK(speed[0] == doctest::Approx(eps / 2.0));
  const double dt = 0.5 * max_stable_dt(speed, g);
  const auto traj = propagate_timedep(s0, PotentialSpec::free(), dt, 1000, u, 100);
  const WaveField& last = traj.frames.back();
  const double t = traj.times.back();
  double amp = 0.0, phase = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    amp = std::max(amp, std::abs(std::abs(last[i]) - 1.0));
    phase = std::max(phase, std::abs(std::arg(last[i] * std::polar(1.0, eps * t - p * g.x(i)))));
  }
  CHECK(amp <= 1e-4);
  CHECK(phase <= 2e-3);
  CHECK(traj.diagnostics.at("energy_drift") <= 1e-3);

  TimeDepState zero{WaveField(g), WaveField(g), 0.0, eps, eps};
  const auto flat = propagate_timedep(zero, PotentialSpec::free(), dt, 50, u, 10);
  for (const auto& f : flat.frames) CHECK(norm(f) == 0.0);
  CHECK_THROWS_AS(propagate_timedep(s0, PotentialSpec::free(), 3.0 * max_stable_dt(speed, g), 10, u), ConfigError);
}

TEST_CASE("time-dependent regime checks") {
  const UnitSystem u;
  const Grid g = Grid::line(-3, 3, 121);
  // E > V with E - 2V < 0 is still hyperbolic.
  const auto bump = PotentialSpec::barrier(0.8, -1.0, 1.0);
  const auto s = wave_speed_squared(bump, 1.0, 1.0, g, u);
  for (double v : s) CHECK(v > 0.0);
  try {
    wave_speed_squared(PotentialSpec::square_well(5.0, 1.0), -1.0, 1.0, g, u);
    FAIL("expected a non-hyperbolic region");
  } catch (const NonHyperbolicError& e) {
    CHECK(!e.offending_positions().empty());
    for (double x : e.offending_positions()) CHECK(std::abs(x) > 1.0);
  }
  CHECK_THROWS_AS(wave_speed_squared(PotentialSpec::step(0.5, 0.0), 1.0, 1.0, g, u), SingularRegionError);
}

TEST_CASE("separated solution") {
  UnitSystem u;
  u.hbar = 0.7;
  const Grid g = Grid::line(0, 1, 51);
  const auto ref = reference::solve_schrodinger_stationary(g, PotentialSpec::free(), 1, u);
  const WaveField& psi = ref.states[0];
  const auto same = separated_solution(psi, 1.3, 0.0, 1.0, 0.0, u);
  CHECK(testing::max_abs_diff(same.values, psi.values) == 0.0);
  for (double t : {0.0, 0.4, 2.5}) {
    const complex f = time_factor(1.3, 0.5, 0.5, t, u);
    CHECK(f.imag() == doctest::Approx(0.0));
    CHECK(f.real() == doctest::Approx(std::cos(1.3 * t / u.hbar)));
    CHECK(time_factor_residual(1.3, {0.3, 0.1}, {-0.2, 0.9}, t, 1e-3, u) <= 1e-8);
  }
  CHECK(separation_constant(1.3, u) == doctest::Approx(-1.3 * 1.3 / 0.49));
}

TEST_CASE("separated solution satisfies the discrete wave equation") {
  const UnitSystem u;
  const Grid g = Grid::line(-3, 3, 601);
  const auto well = PotentialSpec::square_well(10.0, 1.0);
  ShootingOptions lattice;
  lattice.model = ShootingOptions::Model::lattice;
  // E > 0 keeps s(x) > 0 outside the well as well as inside.
  const auto roots = shooting_spectrum(g, well, 0.5, 5.0, u, lattice);
  REQUIRE(!roots.empty());
  const auto& shot = roots.front();
  const auto fp =
      solve_stationary_fixed_point(g, well, shot.node_count, shot.energy + 0.05, 1e-12, 200, u, newton());
  CHECK(std::abs(fp.energy - shot.energy) <= 1e-8);
  const double eps = 0.8;
  CHECK(recover_separation_constant(fp.state, well, fp.energy, eps, u) ==
        doctest::Approx(separation_constant(eps, u)).epsilon(1e-10));

  // psi_tt - s lap psi with a centered second difference in time.
  const auto s = wave_speed_squared(well, fp.energy, eps, g, u);
  const BandedOperator lap = build_laplacian(g, 2);
  const double dt = 1e-3, t = 0.3;
  const complex b1(0.2, 0.1), b2(0.6, -0.3);
  const auto a = separated_solution(fp.state, eps, b1, b2, t - dt, u);
  const auto b = separated_solution(fp.state, eps, b1, b2, t, u);
  const auto c = separated_solution(fp.state, eps, b1, b2, t + dt, u);
  const auto lb = lap.apply(b);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const complex tt = (a[i] - 2.0 * b[i] + c[i]) / (dt * dt);
    worst = std::max(worst, std::abs(tt - s[i] * lb[i]));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("property: eigenvalue ratios are invariant under length scaling") {
  testing::Gen gen(404);
  const UnitSystem u;
  const Grid base = Grid::line(0, 1, 200);
  const auto e1 = reference::solve_schrodinger_stationary(base, PotentialSpec::free(), 4, u).energies;
  for (int trial = 0; trial < 10; ++trial) {
    const double alpha = gen.uniform(0.2, 5.0);
    const Grid scaled = Grid::line(0, alpha, 200);
    std::vector<double> e;
    for (std::size_t k = 0; k < 4; ++k) {
      e.push_back(solve_stationary_fixed_point(scaled, PotentialSpec::free(), k, 1.0, 1e-12, 5, u).energy);
    }
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(std::abs(e[k] / e[0] - e1[k] / e1[0]) <= 1e-9);
      CHECK(e[k] * alpha * alpha == doctest::Approx(e1[k]).epsilon(1e-9));
    }
  }
}

}
