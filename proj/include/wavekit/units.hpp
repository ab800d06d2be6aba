#pragma once

#include <string>

namespace wavekit {

// Physical constants of a scenario. The rest energy is always m c^2.
struct UnitSystem {
  double hbar = 1.0;
  double m = 1.0;
  double c = 1.0;
  double e = 1.0;
  std::string energy_label = "E_h";
  std::string length_label = "a_0";

  double rest_energy() const { return m * c * c; }

  // Throws ConfigError unless hbar, m, c are finite and strictly positive.
  void validate() const;
  bool operator==(const UnitSystem&) const = default;
};

}  // namespace wavekit
