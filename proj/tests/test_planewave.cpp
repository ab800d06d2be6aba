#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "wavekit/planewave.hpp"
#include "wavekit/reference.hpp"

using namespace wavekit;
using namespace wavekit::planewave;

namespace {

UnitSystem units(double hbar, double m, double c) {
  UnitSystem u;
  u.hbar = hbar;
  u.m = m;
  u.c = c;
  return u;
}

}  // namespace

TEST_SUITE("planewave") {

TEST_CASE("calibration constants") {
  CHECK(constant_A(units(1, 1, 1)) == 4.0);
  CHECK(constant_A(units(2, 1, 1)) == 1.0);
  CHECK(constant_A(units(0.5, 1, 1)) == 16.0);
  CHECK(constant_A_prime(2.0) == -1.0);
  CHECK(constant_A_prime(1.0) == -4.0);
  CHECK(constant_A_prime(-2.0) == -1.0);
  CHECK_THROWS_AS(constant_A_prime(0.0), DomainError);

  const UnitSystem e0_4 = units(1, 4, 1);
  CHECK(constant_B(4.0, e0_4) == 0.0);
  CHECK(constant_B(5.0, e0_4) == doctest::Approx(9.0 / 16.0));
  CHECK(constant_D(4.0, e0_4) == 0.0);
  CHECK(constant_B_prime(0.0, units(1, 1, 1)) == 0.0);
  CHECK(constant_B_prime(1.0, units(1, 1, 1)) == doctest::Approx(-0.5));
  CHECK(constant_D_prime(1.0, units(1, 1, 1)) == doctest::Approx(-0.5));
}

TEST_CASE("non-relativistic residuals") {
  const UnitSystem u = units(1, 1, 1);
  CHECK(residual_nr_stationary({1.0, 0.5, 0.5, 0.0}, u) == doctest::Approx(0.0));
  CHECK(residual_nr_stationary({1.0, 0.5, 0.5, 0.1}, u) == doctest::Approx(0.275));
  CHECK_THROWS_AS(residual_nr_stationary({0.0, 0.0, 0.0, 0.0}, u), SingularDenominatorError);
  CHECK(residual_nr_timedep({1.0, 0.5, 0.5, 0.0}, u) == doctest::Approx(0.0));
  CHECK(residual_nr_timedep({1.0, 0.5, 0.5, 0.1}, u) == doctest::Approx(-0.06875));
  CHECK(residual_nr_timedep({0.0, 0.7, 0.5, 0.1}, u) == doctest::Approx(0.09 / 0.4 * 0.49));
  CHECK_THROWS_AS(residual_nr_timedep({1.0, 0.5, 0.3, 0.3}, u), SingularDenominatorError);
}

TEST_CASE("relativistic residuals") {
  const UnitSystem u = units(1, 1, 1);
  CHECK(residual_rel_stationary({2.0, 0.0, std::sqrt(5.0), 0.0}, u) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(residual_rel_stationary({0.0, 0.0, 1.0, 0.0}, u) == 0.0);
  CHECK(std::abs(residual_rel_stationary({1.0, 0.0, 1.0 + std::sqrt(5.0) / 2.0, 1.0}, u)) < 1e-14);
  CHECK_THROWS_AS(residual_rel_stationary({1.0, 0.0, 1.0, -1.0}, u), SingularDenominatorError);
  CHECK(residual_spin_half({0.0, 0.0, 1.0, 0.0}, u, Branch::positive) == 0.0);
  CHECK(residual_spin_half({0.0, 0.0, -1.0, 0.0}, u, Branch::negative) == 0.0);
  CHECK(residual_spin_half({0.0, 0.0, 0.5, 1.0}, u, Branch::positive) == 0.0);
  CHECK(residual_spin_half({0.0, 0.0, -0.5, 1.0}, u, Branch::negative) == 0.0);
  CHECK(residual_massless({3.0, 0.0, 1.5, 1.0}, u, Branch::positive) == 0.0);
  CHECK(residual_massless({3.0, 0.0, -1.5, 1.0}, u, Branch::negative) == 0.0);
  CHECK_THROWS_AS(residual_spin_half({0.0, 0.0, 0.5, -1.0}, u, Branch::positive), SingularDenominatorError);
  CHECK_THROWS_AS(residual_massless({0.0, 0.0, 0.5, -1.0}, u, Branch::positive), SingularDenominatorError);
}

TEST_CASE("property: calibration closure over random free states") {
  testing::Gen gen(101);
  for (int trial = 0; trial < 500; ++trial) {
    const UnitSystem u = units(gen.uniform(0.2, 3.0), gen.uniform(0.2, 3.0), gen.uniform(0.5, 5.0));
    const double p = gen.uniform(-4.0, 4.0);
    const double eps = free_energy_nr(p, u);
    // Eq. (5) with A substituted reduces to eps = p^2/2m for V = 0.
    CHECK(std::abs(residual_nr_stationary({p, eps, eps, 0.0}, u)) <= 1e-12 * std::max(1.0, eps));
    const double erel = free_energy_rel(p, u);
    CHECK(std::abs(residual_rel_timedep({p, erel, erel, 0.0}, u)) <= 1e-12 * erel * erel);
    // Klein-Gordon recovery: the V = 0 residual is E^2 - (c^2 p^2 + E0^2) identically.
    const double e = gen.uniform(0.1, 10.0);
    const double kg = reference::klein_gordon_energy(p, u.rest_energy(), u.c);
    CHECK(residual_rel_timedep({p, e, e, 0.0}, u) == doctest::Approx(e * e - kg * kg));
  }
}

TEST_CASE("property: residuals are continuous as V -> 0") {
  testing::Gen gen(202);
  const UnitSystem u = units(1.0, 1.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double p = gen.uniform(0.1, 3.0);
    const double e = gen.uniform(0.5, 4.0);
    for (double v : {1e-3, 1e-4, 1e-5}) {
      const double k = 50.0;
      CHECK(std::abs(residual_nr_stationary({p, e, e, v}, u) - residual_nr_stationary({p, e, e, 0.0}, u)) <= k * v);
      CHECK(std::abs(residual_nr_timedep({p, e, e, v}, u) - residual_nr_timedep({p, e, e, 0.0}, u)) <= k * v);
      CHECK(std::abs(residual_rel_stationary({p, e, e, v}, u) - residual_rel_stationary({p, e, e, 0.0}, u)) <= k * v);
      CHECK(std::abs(residual_rel_timedep({p, e, e, v}, u) - residual_rel_timedep({p, e, e, 0.0}, u)) <= k * v);
      CHECK(std::abs(residual_spin_half({p, e, e, v}, u, Branch::positive) -
                     residual_spin_half({p, e, e, 0.0}, u, Branch::positive)) <= k * v);
      CHECK(std::abs(residual_massless({p, e, e, v}, u, Branch::negative) -
                     residual_massless({p, e, e, 0.0}, u, Branch::negative)) <= k * v);
    }
  }
}

TEST_CASE("the modified NR dispersion differs from eps = p^2/2m + V at constant V != 0") {
  const UnitSystem u = units(1, 1, 1);
  const double p = 1.3;
  // (E - 2V)^2 = (p^2/2m)(E - V) has no real root when p^2/2m + 4V < 0.
  CHECK(std::isnan(modified_nr_energies(p, -0.3, u).lower));
  for (double v : {-0.1, 0.2, 0.7}) {
    const double schrodinger = free_energy_nr(p, u) + v;
    CHECK(std::abs(residual_nr_stationary({p, 0.0, schrodinger, v}, u)) > 1e-3);
    const auto roots = modified_nr_energies(p, v, u);
    for (double e : {roots.lower, roots.upper}) {
      CHECK(std::abs(residual_nr_stationary({p, 0.0, e, v}, u)) <= 1e-12);
      CHECK(std::abs(e - schrodinger) > 1e-3);
    }
  }
  // V = 0 collapses both routes onto p^2/2m.
  const auto free = modified_nr_energies(1.0, 0.0, u);
  CHECK(free.upper == doctest::Approx(0.5));
}

TEST_CASE("dispersion solvers satisfy their residuals") {
  testing::Gen gen(303);
  for (int trial = 0; trial < 200; ++trial) {
    const UnitSystem u = units(gen.uniform(0.5, 2.0), gen.uniform(0.5, 2.0), gen.uniform(0.5, 3.0));
    const double p = gen.uniform(-3.0, 3.0);
    const double v = gen.uniform(-0.9, 3.0) * u.rest_energy();
    const double er = modified_rel_energy(p, v, u, Branch::positive);
    CHECK(std::abs(residual_rel_stationary({p, 0.0, er, v}, u)) <= 1e-10 * std::max(1.0, er * er));
    for (Branch b : {Branch::positive, Branch::negative}) {
      CHECK(std::abs(residual_spin_half({p, 0.0, spin_half_energy(p, v, u, b), v}, u, b)) <= 1e-12);
      CHECK(std::abs(residual_massless({p, 0.0, massless_energy(p, v, u, b), v}, u, b)) <= 1e-12);
    }
  }
}

}
