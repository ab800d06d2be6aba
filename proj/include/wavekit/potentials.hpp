#pragma once

#include <string>
#include <variant>
#include <vector>

#include "wavekit/errors.hpp"
#include "wavekit/numgrid.hpp"

namespace wavekit {

namespace potential {

struct Free {
  bool operator==(const Free&) const = default;
};

// -depth for |x - center| <= half_width, 0 elsewhere.
struct SquareWell {
  double depth = 0.0;
  double half_width = 0.0;
  bool operator==(const SquareWell&) const = default;
};

// height for x - center >= edge, 0 elsewhere.
struct Step {
  double height = 0.0;
  double edge = 0.0;
  bool operator==(const Step&) const = default;
};

// height for left <= x - center <= right, 0 elsewhere.
struct Barrier {
  double height = 0.0;
  double left = 0.0;
  double right = 0.0;
  bool operator==(const Barrier&) const = default;
};

// m omega^2 (x - center)^2 / 2.
struct Harmonic {
  double omega = 1.0;
  double mass = 1.0;
  bool operator==(const Harmonic&) const = default;
};

// -strength / r with r = x; radial grids only.
struct Coulomb {
  double strength = 1.0;
  bool operator==(const Coulomb&) const = default;
};

// values[0] left of breakpoints[0], values[i] on [breakpoints[i-1], breakpoints[i]).
struct PiecewiseConstant {
  std::vector<double> breakpoints;
  std::vector<double> values;
  bool operator==(const PiecewiseConstant&) const = default;
};

// Linear interpolation between samples; evaluation outside the samples is a domain error.
struct Tabulated {
  std::vector<double> positions;
  std::vector<double> values;
  bool operator==(const Tabulated&) const = default;
};

}  // namespace potential

struct PotentialSpec {
  using Variant = std::variant<potential::Free, potential::SquareWell, potential::Step, potential::Barrier,
                               potential::Harmonic, potential::Coulomb, potential::PiecewiseConstant,
                               potential::Tabulated>;
  Variant variant = potential::Free{};
  double center = 0.0;

  static PotentialSpec free() { return {}; }
  static PotentialSpec square_well(double depth, double half_width, double center = 0.0);
  static PotentialSpec step(double height, double edge, double center = 0.0);
  static PotentialSpec barrier(double height, double left, double right, double center = 0.0);
  static PotentialSpec harmonic(double omega, double mass = 1.0, double center = 0.0);
  static PotentialSpec coulomb(double strength);
  static PotentialSpec piecewise_constant(std::vector<double> breakpoints, std::vector<double> values,
                                          double center = 0.0);
  static PotentialSpec constant(double value);
  static PotentialSpec tabulated(std::vector<double> positions, std::vector<double> values);

  std::string type_name() const;
  bool is_piecewise_constant() const;
  bool operator==(const PotentialSpec&) const = default;
};

double evaluate(const PotentialSpec& spec, double x);
std::vector<double> sample(const PotentialSpec& spec, const Grid& grid);

// Throws ConfigError if the spec cannot be evaluated at every node of the grid.
void check_covers(const PotentialSpec& spec, const Grid& grid);

// A maximal interval of constant potential value.
struct Region {
  double x_begin;
  double x_end;
  double value;
};

// Constant-value regions covering [x_lo, x_hi]; piecewise-constant variants only.
std::vector<Region> regions(const PotentialSpec& spec, double x_lo, double x_hi);

enum class SingularKind { E_equals_V, E_equals_2V, V_equals_minus_E0 };

const char* to_string(SingularKind kind);

struct SingularSet {
  SingularKind kind = SingularKind::E_equals_V;
  double energy = 0.0;  // the E (or E0) the set was computed for
  std::vector<double> locations;
  // Smallest distance from a location to a grid node; +inf when empty.
  double proximity = 0.0;

  bool empty() const { return locations.empty(); }
};

// Zeros of E - V(x), E - 2V(x) or V(x) + E0 inside the grid domain. For
// V_equals_minus_E0 the energy argument is E0. Scans at 8x the grid density and
// refines each sign change by bisection to 1e-12 in position; sign changes across
// a jump of a discontinuous potential are not zeros and are dropped.
SingularSet find_singular_set(const PotentialSpec& spec, double energy, SingularKind kind, const Grid& grid);

class SingularRegionError : public Error {
 public:
  SingularRegionError(const std::string& what, SingularSet set)
      : Error(ErrorKind::singular_region, what), set_(std::move(set)) {}
  const SingularSet& singular_set() const { return set_; }

 private:
  SingularSet set_;
};

}  // namespace wavekit
