#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "support.hpp"
#include "wavekit/reference.hpp"
#include "wavekit/spin_half.hpp"

using namespace wavekit;
using namespace wavekit::spin_half;

namespace {

const double pi = std::numbers::pi;

SpinorField random_spinor(testing::Gen& gen, const Grid& g) {
  SpinorField s(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    s.upper[i] = gen.complex_unit();
    s.lower[i] = gen.complex_unit();
  }
  return s;
}

double spinor_diff(const SpinorField& a, const SpinorField& b) {
  return std::max(testing::max_abs_diff(a.upper, b.upper), testing::max_abs_diff(a.lower, b.lower));
}

// Eigenvalue of the list closest to a target.
double closest(const std::vector<double>& values, double target) {
  return *std::min_element(values.begin(), values.end(),
                           [&](double a, double b) { return std::abs(a - target) < std::abs(b - target); });
}

}  // namespace

TEST_SUITE("spin_half") {

TEST_CASE("Clifford algebra") {
  const auto four = clifford_check(CliffordSet::dirac());
  CHECK(four.max_violation <= 1e-15);
  CHECK(four.identities.size() >= 5);
  CHECK(clifford_check(CliffordSet::reduced()).max_violation <= 1e-15);

  const auto s = pauli_matrices();
  const CMatrix anti = s[0] * s[1] + s[1] * s[0];
  for (complex z : anti.a) CHECK(std::abs(z) == 0.0);

  CliffordSet broken = CliffordSet::dirac();
  broken.beta(0, 0) = 2.0;
  CHECK(clifford_check(broken).max_violation > 0.5);
  CliffordSet swapped = CliffordSet::reduced();
  swapped.beta = s[0];
  CHECK(clifford_check(swapped).max_violation > 0.5);
}

TEST_CASE("modified Hamiltonian on a free plane wave") {
  UnitSystem u;
  u.c = 2.0;
  const Grid g = Grid::line(0, 2 * pi, 1024, Boundary::periodic);
  const double p = 3.0, e0 = u.rest_energy();
  const double energy = reference::dirac_free_energies(p, e0, u.c).first;
  SpinorField psi(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const complex wave = std::polar(1.0, p * g.x(i));
    psi.upper[i] = (energy + e0) * wave;
    psi.lower[i] = u.c * p * wave;
  }
  const SpinorField out = apply_modified_hamiltonian(psi, PotentialSpec::free(), u);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    worst = std::max({worst, std::abs(out.upper[i] - energy * psi.upper[i]),
                      std::abs(out.lower[i] - energy * psi.lower[i])});
  }
  const double h = g.spacing();
  CHECK(energy > 0.0);
  CHECK(worst <= u.c * p * p * p * h * h * (energy + e0));
}

TEST_CASE("prefactor commutes with a constant potential") {
  const UnitSystem u;
  const Grid g = Grid::line(-1, 1, 64, Boundary::periodic);
  testing::Gen gen(7);
  const SpinorField psi = random_spinor(gen, g);
  const SpinorField free = apply_modified_hamiltonian(psi, PotentialSpec::free(), u);
  for (double v : {-0.5, 0.25, 3.0}) {
    const SpinorField out = apply_modified_hamiltonian(psi, PotentialSpec::constant(v), u);
    const double k = u.rest_energy() / (u.rest_energy() + v);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(std::abs(out.upper[i] - k * free.upper[i]) <= 1e-15 * std::abs(free.upper[i]) * 4);
      CHECK(std::abs(out.lower[i] - k * free.lower[i]) <= 1e-15 * std::abs(free.lower[i]) * 4);
    }
  }
  const SpinorField zero = apply_modified_hamiltonian(SpinorField(g), PotentialSpec::constant(0.3), u);
  CHECK(norm(zero) == 0.0);
  CHECK_THROWS_AS(apply_modified_hamiltonian(psi, PotentialSpec::constant(-1.0), u), InvalidScenarioError);
}

TEST_CASE("property: the Dirac operator is symmetric") {
  testing::Gen gen(8);
  for (int trial = 0; trial < 20; ++trial) {
    UnitSystem u;
    u.c = gen.uniform(0.5, 3.0);
    u.m = gen.uniform(0.1, 2.0);
    const Grid g = Grid::line(0, gen.uniform(1.0, 5.0), 16 + 2 * static_cast<std::size_t>(gen.integer(0, 40)),
                              Boundary::periodic);
    const double r = gen.uniform(0.0, 1.5);
    const SpinorField a = random_spinor(gen, g), b = random_spinor(gen, g);
    const complex lhs = inner_product(a, apply_dirac_operator(b, u, r));
    const complex rhs = inner_product(apply_dirac_operator(a, u, r), b);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(lhs) + 1.0));
  }
}

TEST_CASE("free spectrum follows the Dirac dispersion") {
  const UnitSystem u;
  const Grid g = Grid::line(0, 1, 256, Boundary::periodic);
  const auto spec = solve_spin_half_stationary(g, PotentialSpec::free(), u, 1.0, 10);
  REQUIRE(spec.energies.size() == 10);
  CHECK(spec.energies[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(spec.energies[1] == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> expected{-1.0, 1.0};
  for (int k = 1; k <= 2; ++k) {
    const double e = reference::dirac_free_energies(2 * pi * k, u.rest_energy(), u.c).first;
    expected.insert(expected.end(), {-e, -e, e, e});
  }
  for (std::size_t k = 0; k < 10; ++k) {
    CHECK(std::abs(spec.energies[k] - expected[k]) <= 5e-3 * std::abs(expected[k]));
  }
  CHECK(spec.diagnostics.at("max_generalized_residual") <= 1e-8);

  const auto half = solve_spin_half_stationary(g, PotentialSpec::constant(u.rest_energy()), u, 1.0, 10);
  for (std::size_t k = 0; k < 10; ++k) {
    CHECK(std::abs(half.energies[k] - 0.5 * spec.energies[k]) <= 1e-10 * std::abs(spec.energies[k]));
  }
  CHECK_THROWS_AS(solve_spin_half_stationary(g, PotentialSpec::constant(-2.0), u, 1.0, 4), InvalidScenarioError);
}

TEST_CASE("generalized residual with a varying potential") {
  const UnitSystem u;
  const Grid g = Grid::line(-4, 4, 200);
  const auto spec = solve_spin_half_stationary(g, PotentialSpec::harmonic(0.5), u, 1.0, 6);
  CHECK(spec.diagnostics.at("max_generalized_residual") <= 1e-8);
  for (std::size_t k = 1; k < spec.energies.size(); ++k) {
    CHECK(std::abs(spec.energies[k - 1]) <= std::abs(spec.energies[k]) + 1e-12);
  }
}

TEST_CASE("the Wilson term shifts low modes by O(h)") {
  const UnitSystem u;
  std::vector<double> shifts;
  for (std::size_t n : {64, 128, 256}) {
    const Grid g = Grid::line(0, 1, n, Boundary::periodic);
    const auto with = solve_spin_half_stationary(g, PotentialSpec::free(), u, 1.0, 6);
    // Much smaller r lets the doubler branch into the lowest modes at coarse h.
    const auto without = solve_spin_half_stationary(g, PotentialSpec::free(), u, 0.5, 6);
    double worst = 0.0;
    for (std::size_t k = 0; k < 6; ++k) worst = std::max(worst, std::abs(with.energies[k] - without.energies[k]));
    shifts.push_back(worst);
  }
  CHECK(shifts[0] / shifts[1] == doctest::Approx(2.0).epsilon(0.15));
  CHECK(shifts[1] / shifts[2] == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("massless dispersion converges at second order") {
  const UnitSystem u;
  const double v = 0.4, p = 2 * pi;
  const double exact = u.c * p / (1.0 + v / u.rest_energy());
  std::vector<double> errors;
  for (std::size_t n : {32, 64, 128}) {
    const Grid g = Grid::line(0, 1, n, Boundary::periodic);
    const auto spec = solve_massless(g, PotentialSpec::constant(v), u, 12);
    errors.push_back(std::abs(closest(spec.energies, exact) - exact));
    CHECK(std::abs(closest(spec.energies, -exact) + exact) == doctest::Approx(errors.back()));
  }
  CHECK(std::log2(errors[0] / errors[1]) == doctest::Approx(2.0).epsilon(0.1));
  CHECK(std::log2(errors[1] / errors[2]) == doctest::Approx(2.0).epsilon(0.1));

  const Grid g = Grid::line(0, 1, 64, Boundary::periodic);
  const auto free = solve_massless(g, PotentialSpec::free(), u, 12);
  const auto half = solve_massless(g, PotentialSpec::constant(u.rest_energy()), u, 12);
  for (std::size_t k = 0; k < 12; ++k) {
    CHECK(std::abs(half.energies[k] - 0.5 * free.energies[k]) <= 1e-10 * (1.0 + std::abs(free.energies[k])));
  }
}

TEST_CASE("massless propagation") {
  const UnitSystem u;
  const Grid g = Grid::line(-10, 10, 512, Boundary::periodic);
  SpinorField phi(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x(i);
    phi.upper[i] = std::exp(-x * x) * std::polar(1.0, 2.0 * x);
    phi.lower[i] = 0.5 * phi.upper[i];
  }
  const double dt = 0.5 * g.spacing() / u.c;
  const auto traj = propagate_massless(phi, PotentialSpec::free(), dt, 1000, u, 100);
  CHECK(traj.diagnostics.at("norm_drift") <= 1e-6);
  CHECK(traj.norms.size() == 1001);

  // A potential step breaks the symmetry; the drift is reported, not fatal.
  const auto bumpy = propagate_massless(phi, PotentialSpec::barrier(0.5, -1.0, 1.0), dt, 200, u, 100);
  CHECK(bumpy.diagnostics.at("norm_drift") > 0.0);

  const auto flat = propagate_massless(SpinorField(g), PotentialSpec::free(), dt, 10, u, 5);
  for (const auto& f : flat.frames) CHECK(norm(f) == 0.0);
  CHECK_THROWS_AS(propagate_massless(phi, PotentialSpec::free(), 0.0, 10, u), ConfigError);
}

}
