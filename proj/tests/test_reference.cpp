#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "wavekit/reference.hpp"

using namespace wavekit;
using std::numbers::pi;

TEST_SUITE("reference") {

TEST_CASE("infinite well") {
  const UnitSystem u;
  const Grid g = Grid::line(0.0, pi, 2048);
  const SpectrumResult sp = reference::solve_schrodinger_stationary(g, PotentialSpec::free(), 5, u);
  for (int n = 1; n <= 5; ++n) {
    CHECK(std::abs(sp.energies[n - 1] / (n * n / 2.0) - 1.0) <= 1e-3);
    CHECK(reference::infinite_well_energy(n, pi, u) == doctest::Approx(n * n / 2.0));
  }
  CHECK(sp.diagnostics.at("max_residual") <= 1e-8);
}

TEST_CASE("harmonic ladder") {
  const UnitSystem u;
  const Grid g = Grid::line(-10.0, 10.0, 2001);
  const SpectrumResult sp = reference::solve_schrodinger_stationary(g, PotentialSpec::harmonic(1.0), 4, u);
  for (int n = 0; n <= 3; ++n) CHECK(std::abs(sp.energies[n] - (n + 0.5)) <= 1e-3);
}

TEST_CASE("hydrogen ground state") {
  const UnitSystem u;
  const Grid g = Grid::radial(40.0, 4000);
  const SpectrumResult sp = reference::solve_schrodinger_stationary(g, PotentialSpec::coulomb(1.0), 2, u);
  CHECK(std::abs(sp.energies[0] + 0.5) <= 1e-3);
  CHECK(std::abs(sp.energies[1] - reference::hydrogenic_energy(2, 1.0, u)) <= 1e-3);
}

TEST_CASE("finite well catalog agrees with a wide-box grid solve") {
  const UnitSystem u;
  const auto analytic = reference::finite_well_energies(10.0, 1.0, u);
  REQUIRE(analytic.size() == 3);
  // Edges at cell midpoints keep the discretization second order.
  const Grid g = Grid::line(-12.002, 12.002, 6002);
  const auto sp = reference::solve_schrodinger_stationary(g, PotentialSpec::square_well(10.0, 1.0), 3, u);
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(sp.energies[k] - analytic[k]) < 5e-3);
}

TEST_CASE("too many states is a configuration error") {
  const Grid g = Grid::line(0.0, 1.0, 10);
  CHECK_THROWS_AS(reference::solve_schrodinger_stationary(g, PotentialSpec::free(), 9, UnitSystem{}), ConfigError);
}

TEST_CASE("spectrum invariants: sorted, normalized, orthogonal, increasing nodes") {
  const UnitSystem u;
  const Grid g = Grid::line(-5.0, 5.0, 801);
  const auto sp = reference::solve_schrodinger_stationary(g, PotentialSpec::square_well(8.0, 1.0), 6, u);
  for (std::size_t i = 0; i < 6; ++i) {
    if (i) CHECK(sp.energies[i] > sp.energies[i - 1]);
    if (i) CHECK(sp.node_counts[i] > sp.node_counts[i - 1]);
    CHECK(std::abs(norm(sp.states[i]) - 1.0) <= 1e-10);
    for (std::size_t j = 0; j < 6; ++j) {
      const double expect = i == j ? 1.0 : 0.0;
      CHECK(std::abs(inner_product(sp.states[i], sp.states[j]) - expect) <= 1e-8);
    }
  }
}

TEST_CASE("property: reflection invariance for symmetric potentials") {
  testing::Gen gen(3);
  const UnitSystem u;
  for (int trial = 0; trial < 10; ++trial) {
    const double L = gen.uniform(3.0, 8.0);
    const Grid g = Grid::line(-L, L, static_cast<std::size_t>(gen.integer(101, 601)));
    const double depth = gen.uniform(1.0, 20.0), a = gen.uniform(0.3, 2.0);
    const auto right = reference::solve_schrodinger_stationary(g, PotentialSpec::square_well(depth, a, 0.3), 3, u);
    const auto left = reference::solve_schrodinger_stationary(g, PotentialSpec::square_well(depth, a, -0.3), 3, u);
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(right.energies[k] - left.energies[k]) <= 1e-10);
  }
}

TEST_CASE("Crank-Nicolson propagation") {
  const UnitSystem u;
  SUBCASE("eigenstate keeps its overlap and the norm is conserved") {
    const Grid g = Grid::line(-6.0, 6.0, 601);
    const auto V = PotentialSpec::harmonic(1.0);
    const auto sp = reference::solve_schrodinger_stationary(g, V, 1, u);
    const Trajectory tr = reference::propagate_schrodinger(sp.states[0], V, 0.01, 1000, u, 1000);
    CHECK(std::abs(std::abs(inner_product(tr.frames.back(), sp.states[0])) - 1.0) <= 1e-8);
    CHECK(tr.diagnostics.at("norm_drift") <= 1e-10);
  }
  SUBCASE("zero field stays zero") {
    const Grid g = Grid::line(-1.0, 1.0, 64);
    const Trajectory tr = reference::propagate_schrodinger(WaveField(g), PotentialSpec::free(), 0.01, 10, u, 5);
    for (const auto& f : tr.frames) {
      for (const auto& v : f.values) CHECK(v == complex{});
    }
  }
  SUBCASE("free Gaussian spreads per the analytic law") {
    const Grid g = Grid::line(-40.0, 40.0, 4001);
    const double sigma = 1.0;
    WaveField psi(g);
    for (std::size_t i = 0; i < g.size(); ++i) psi[i] = std::exp(-g.x(i) * g.x(i) / (4 * sigma * sigma));
    psi = normalized(psi);
    const double dt = 0.002;
    const std::size_t steps = 1000;
    const Trajectory tr = reference::propagate_schrodinger(psi, PotentialSpec::free(), dt, steps, u, steps);
    auto width = [&](const WaveField& f) {
      double m2 = 0.0, n = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        m2 += std::norm(f[i]) * g.x(i) * g.x(i);
        n += std::norm(f[i]);
      }
      return std::sqrt(m2 / n);
    };
    const double t = dt * steps;
    const double expect = sigma * std::sqrt(1.0 + std::pow(u.hbar * t / (2 * u.m * sigma * sigma), 2));
    CHECK(std::abs(width(tr.frames.back()) / expect - 1.0) <= 0.01);
  }
}

TEST_CASE("relativistic dispersion catalog") {
  CHECK(reference::klein_gordon_energy(0.0, 2.0, 1.0) == 2.0);
  CHECK(reference::klein_gordon_energy(-3.0, 0.0, 2.0) == 6.0);
  CHECK(reference::klein_gordon_energy(3.0, 4.0, 1.0) == 5.0);
  CHECK(reference::dirac_free_energies(0.0, 4.0, 1.0) == std::pair{4.0, -4.0});
  CHECK(reference::dirac_free_energies(3.0, 4.0, 1.0) == std::pair{5.0, -5.0});
  CHECK(reference::dirac_free_energies(1.0, 0.0, 1.0) == std::pair{1.0, -1.0});
}

}
