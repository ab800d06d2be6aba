#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wavekit {

enum class ErrorKind {
  configuration,
  usage,
  domain,
  singular_denominator,
  singular_region,
  non_convergence,
  state_tracking,
  no_root,
  non_hyperbolic,
  invalid_scenario,
  stability,
  out_of_scope,
};

const char* to_string(ErrorKind kind);

// Shortest "%.10g" rendering, for messages.
std::string format_number(double x);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::configuration, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

// A closed-form expression hit a zero denominator (E = V, V = -E0, ...).
class SingularDenominatorError : public Error {
 public:
  explicit SingularDenominatorError(const std::string& what)
      : Error(ErrorKind::singular_denominator, what) {}
};

class InvalidScenarioError : public Error {
 public:
  explicit InvalidScenarioError(const std::string& what)
      : Error(ErrorKind::invalid_scenario, what) {}
};

class StabilityError : public Error {
 public:
  explicit StabilityError(const std::string& what) : Error(ErrorKind::stability, what) {}
};

class OutOfScopeError : public Error {
 public:
  explicit OutOfScopeError(const std::string& what) : Error(ErrorKind::out_of_scope, what) {}
};

class NoRootError : public Error {
 public:
  explicit NoRootError(const std::string& what) : Error(ErrorKind::no_root, what) {}
};

class StateTrackingError : public Error {
 public:
  StateTrackingError(const std::string& what, std::vector<double> history)
      : Error(ErrorKind::state_tracking, what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> history)
      : Error(ErrorKind::non_convergence, what), history_(std::move(history)) {}
  // Energy iterates E_0, E_1, ... in the order they were produced.
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

// Positions x where the time-dependent coefficient is not a positive squared speed.
class NonHyperbolicError : public Error {
 public:
  NonHyperbolicError(const std::string& what, std::vector<double> offending)
      : Error(ErrorKind::non_hyperbolic, what), offending_(std::move(offending)) {}
  const std::vector<double>& offending_positions() const { return offending_; }

 private:
  std::vector<double> offending_;
};

}  // namespace wavekit
