#include "wavekit/units.hpp"

#include <cmath>

#include "wavekit/errors.hpp"

namespace wavekit {

void UnitSystem::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(hbar)) throw ConfigError("units.hbar must be > 0");
  if (!positive(m)) throw ConfigError("units.m must be > 0");
  if (!positive(c)) throw ConfigError("units.c must be > 0");
  if (!std::isfinite(e)) throw ConfigError("units.e must be finite");
}

}  // namespace wavekit
