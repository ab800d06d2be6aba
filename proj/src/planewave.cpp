#include "wavekit/planewave.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wavekit/errors.hpp"

namespace wavekit::planewave {

namespace {

double sign_of(Branch b) { return b == Branch::positive ? 1.0 : -1.0; }

void require_nr_denominator(const PlaneWaveState& s) {
  if (s.E - s.V == 0.0) throw SingularDenominatorError("E = V makes (E - 2V)^2/(E - V) singular");
}

// 1 + V/E0, rejecting V <= -E0.
double rel_factor(double V, const UnitSystem& units) {
  const double e0 = units.rest_energy();
  if (!(V > -e0)) throw SingularDenominatorError("V <= -E0 makes the factor (1 + V/E0) vanish or flip sign");
  return 1.0 + V / e0;
}

// Residual divided by the larger of the two balancing terms.
double relative(double lhs, double rhs) {
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  return scale == 0.0 ? 0.0 : (lhs + rhs) / scale;
}

}  // namespace

double constant_A(const UnitSystem& units) { return 4.0 / (units.hbar * units.hbar); }

double constant_A_prime(double epsilon) {
  if (epsilon == 0.0) throw DomainError("A' = -4/eps^2 is undefined at eps = 0");
  return -4.0 / (epsilon * epsilon);
}

double constant_B(double E, const UnitSystem& units) {
  const double e0 = units.rest_energy();
  return (E * E - e0 * e0) / (e0 * e0 * units.hbar * units.hbar * units.c * units.c);
}

double constant_D(double epsilon, const UnitSystem& units) { return constant_B(epsilon, units); }

double constant_B_prime(double p, const UnitSystem& units) {
  const double e0 = units.rest_energy();
  return -p * p / (e0 * e0 * (e0 * e0 + units.c * units.c * p * p));
}

double constant_D_prime(double p, const UnitSystem& units) { return constant_B_prime(p, units); }

double free_energy_nr(double p, const UnitSystem& units) { return p * p / (2.0 * units.m); }

double free_energy_rel(double p, const UnitSystem& units) { return std::hypot(units.c * p, units.rest_energy()); }

double residual_nr_stationary(const PlaneWaveState& s, const UnitSystem& units) {
  require_nr_denominator(s);
  const double d = s.E - 2.0 * s.V;
  return s.p * s.p / (2.0 * units.m) - d * d / (s.E - s.V);
}

double residual_nr_timedep(const PlaneWaveState& s, const UnitSystem& units) {
  require_nr_denominator(s);
  const double d = s.E - 2.0 * s.V;
  const double h2 = units.hbar * units.hbar;
  const double eps2 = s.epsilon * s.epsilon;
  return -eps2 * s.p * s.p / (2.0 * units.m * h2) + d * d / (s.E - s.V) * eps2 / h2;
}

double residual_rel_stationary(const PlaneWaveState& s, const UnitSystem& units) {
  const double f = rel_factor(s.V, units);
  const double e0 = units.rest_energy();
  const double w = s.E - s.V;
  return units.c * units.c * s.p * s.p - (w * w - e0 * e0) * f * f;
}

double residual_rel_timedep(const PlaneWaveState& s, const UnitSystem& units) {
  const double f = rel_factor(s.V, units);
  const double e0 = units.rest_energy();
  const double lhs = s.E * f;
  return lhs * lhs - (units.c * units.c * s.p * s.p + e0 * e0);
}

double residual_spin_half(const PlaneWaveState& s, const UnitSystem& units, Branch branch) {
  return s.E - spin_half_energy(s.p, s.V, units, branch);
}

double residual_massless(const PlaneWaveState& s, const UnitSystem& units, Branch branch) {
  return s.E - massless_energy(s.p, s.V, units, branch);
}

double substitution_A(double p, double constant, const UnitSystem& units) {
  // (i p / hbar)^2 + A eps^2 m^2 / (2 m eps), eps = p^2/2m
  const double eps = free_energy_nr(p, units);
  return relative(-p * p / (units.hbar * units.hbar), constant * eps * units.m / 2.0);
}

double substitution_A_prime(double p, double constant, const UnitSystem& units) {
  // (i p / hbar)^2 + A' eps^2 m^2 / (2 m eps) (-i eps / hbar)^2
  const double eps = free_energy_nr(p, units);
  const double h2 = units.hbar * units.hbar;
  return relative(-p * p / h2, constant * eps * units.m / 2.0 * (-eps * eps / h2));
}

double substitution_B(double p, double constant, const UnitSystem& units) {
  // (i p / hbar)^2 + B m0^2 c^4
  const double e0 = units.rest_energy();
  return relative(-p * p / (units.hbar * units.hbar), constant * e0 * e0);
}

double substitution_B_prime(double p, double constant, const UnitSystem& units) {
  // (i p / hbar)^2 + B' m0^2 c^4 (-i E / hbar)^2
  const double e0 = units.rest_energy();
  const double E = free_energy_rel(p, units);
  const double h2 = units.hbar * units.hbar;
  return relative(-p * p / h2, constant * e0 * e0 * (-E * E / h2));
}

double substitution_D(double p, double constant, const UnitSystem& units) {
  return substitution_B(p, constant, units);
}

double substitution_D_prime(double p, double constant, const UnitSystem& units) {
  return substitution_B_prime(p, constant, units);
}

NrDispersionRoots modified_nr_energies(double p, double V, const UnitSystem& units) {
  // (E - 2V)^2 = K (E - V) with K = p^2/2m
  const double k = free_energy_nr(p, units);
  const double disc = k * k + 4.0 * k * V;
  if (disc < 0.0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  const double root = std::sqrt(disc);
  return {0.5 * (4.0 * V + k - root), 0.5 * (4.0 * V + k + root)};
}

double modified_rel_energy(double p, double V, const UnitSystem& units, Branch branch) {
  const double f = rel_factor(V, units);
  const double e0 = units.rest_energy();
  const double cp = units.c * p / f;
  return V + sign_of(branch) * std::sqrt(e0 * e0 + cp * cp);
}

double spin_half_energy(double p, double V, const UnitSystem& units, Branch branch) {
  const double f = rel_factor(V, units);
  return sign_of(branch) * free_energy_rel(p, units) / f;
}

double massless_energy(double p, double V, const UnitSystem& units, Branch branch) {
  const double f = rel_factor(V, units);
  return sign_of(branch) * units.c * p / f;
}

}  // namespace wavekit::planewave
