#pragma once

#include "wavekit/units.hpp"

namespace wavekit::planewave {

// A plane wave exp(i(p x - eps t)/hbar) in a constant potential V.
struct PlaneWaveState {
  double p = 0.0;
  double epsilon = 0.0;  // free energy
  double E = 0.0;        // total energy
  double V = 0.0;        // constant potential energy
};

enum class Branch { positive, negative };

double constant_A(const UnitSystem& units);
double constant_A_prime(double epsilon);
double constant_B(double E, const UnitSystem& units);
double constant_D(double epsilon, const UnitSystem& units);
double constant_B_prime(double p, const UnitSystem& units);
double constant_D_prime(double p, const UnitSystem& units);

// Free-particle energies used to build calibrated states.
double free_energy_nr(double p, const UnitSystem& units);
double free_energy_rel(double p, const UnitSystem& units);

// p^2/2m - (E - 2V)^2/(E - V).
double residual_nr_stationary(const PlaneWaveState& s, const UnitSystem& units);
// -eps^2 p^2/(2m hbar^2) + (E - 2V)^2/(E - V) eps^2/hbar^2.
double residual_nr_timedep(const PlaneWaveState& s, const UnitSystem& units);
// c^2 p^2 - [(E - V)^2 - E0^2](1 + V/E0)^2.
double residual_rel_stationary(const PlaneWaveState& s, const UnitSystem& units);
// (E (1 + V/E0))^2 - (c^2 p^2 + E0^2).
double residual_rel_timedep(const PlaneWaveState& s, const UnitSystem& units);
// E - (+-sqrt(c^2 p^2 + E0^2)) E0/(E0 + V).
double residual_spin_half(const PlaneWaveState& s, const UnitSystem& units, Branch branch);
// E - (+-c p) E0/(E0 + V).
double residual_massless(const PlaneWaveState& s, const UnitSystem& units, Branch branch);

// Residuals of the defining plane-wave substitutions with a calibration constant
// inserted (each vanishes when the constant takes its calibrated value).
double substitution_A(double p, double constant, const UnitSystem& units);
double substitution_A_prime(double p, double constant, const UnitSystem& units);
double substitution_B(double p, double constant, const UnitSystem& units);
double substitution_B_prime(double p, double constant, const UnitSystem& units);
double substitution_D(double p, double constant, const UnitSystem& units);
double substitution_D_prime(double p, double constant, const UnitSystem& units);

// Energies solving each dispersion relation at constant V.
struct NrDispersionRoots {
  double lower;  // nan when the discriminant is negative
  double upper;
};
NrDispersionRoots modified_nr_energies(double p, double V, const UnitSystem& units);
double modified_rel_energy(double p, double V, const UnitSystem& units, Branch branch);
double spin_half_energy(double p, double V, const UnitSystem& units, Branch branch);
double massless_energy(double p, double V, const UnitSystem& units, Branch branch);

}  // namespace wavekit::planewave
