#include "wavekit/errors.hpp"

#include <cstdio>

namespace wavekit {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::configuration:
      return "configuration";
    case ErrorKind::usage:
      return "usage";
    case ErrorKind::domain:
      return "domain";
    case ErrorKind::singular_denominator:
      return "singular_denominator";
    case ErrorKind::singular_region:
      return "singular_region";
    case ErrorKind::non_convergence:
      return "non_convergence";
    case ErrorKind::state_tracking:
      return "state_tracking";
    case ErrorKind::no_root:
      return "no_root";
    case ErrorKind::non_hyperbolic:
      return "non_hyperbolic";
    case ErrorKind::invalid_scenario:
      return "invalid_scenario";
    case ErrorKind::stability:
      return "stability";
    case ErrorKind::out_of_scope:
      return "out_of_scope";
  }
  return "unknown";
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace wavekit
