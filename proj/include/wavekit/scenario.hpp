#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "wavekit/errors.hpp"
#include "wavekit/numgrid.hpp"
#include "wavekit/potentials.hpp"
#include "wavekit/units.hpp"

namespace wavekit::scenario {

inline constexpr const char* kVersion = "0.1.0";
// Speed of light in atomic units, the default for relativistic scenarios.
inline constexpr double kAtomicC = 137.035999;

enum class Equation {
  schrodinger,
  modified_nr_stationary,
  modified_nr_timedep,
  modified_rel_stationary,
  modified_rel_timedep,
  spin_half_stationary,
  massless_spin_half,
  dispersion_audit,
};

const char* to_string(Equation equation);
const std::vector<std::string>& equation_ids();
bool relativistic_by_default(Equation equation);

struct GridBlock {
  GridKind kind = GridKind::line;
  Boundary boundary = Boundary::dirichlet;
  double x_min = 0.0;
  double x_max = 0.0;
  double r_max = 0.0;
  std::size_t n_points = 0;

  Grid build() const;
  bool operator==(const GridBlock&) const = default;
};

struct SolverBlock {
  std::string method = "fixed_point";  // fixed_point | shooting
  std::string model = "continuum";     // continuum | lattice (shooting)
  std::size_t n_states = 3;
  std::size_t state_index = 0;  // node count of the first tracked state (fixed point)
  double tol = 1e-10;
  std::size_t max_iter = 200;
  double damping = 0.5;
  std::string acceleration = "newton";  // none | newton
  std::vector<double> energy_init;      // per state; defaults to the Schrodinger levels
  std::optional<std::pair<double, double>> bracket;
  std::size_t scan_points = 2000;
  std::string policy = "reject";  // reject | clamp
  double floor = 0.0;
  int order = 2;
  int l = 0;
  double wilson_r = 1.0;
  std::optional<double> dt;
  std::size_t steps = 1000;
  std::optional<double> energy;   // E of the time-dependent modified equation
  std::optional<double> epsilon;  // free energy eps
  std::vector<double> momenta;    // dispersion audit
  bool additional_term = false;   // first-order audit in the reference ground state

  bool operator==(const SolverBlock&) const = default;
};

struct InitialBlock {
  std::string type = "gaussian";  // gaussian | plane_wave
  std::optional<double> x0;
  std::optional<double> sigma;
  double p0 = 0.0;

  bool operator==(const InitialBlock&) const = default;
};

struct OutputBlock {
  std::optional<std::string> path;
  std::string format = "json";  // json | csv
  std::size_t frame_stride = 10;
  bool include_states = true;

  bool operator==(const OutputBlock&) const = default;
};

struct ScenarioConfig {
  Equation equation = Equation::schrodinger;
  bool relativistic = false;
  UnitSystem units;
  PotentialSpec potential;
  std::optional<GridBlock> grid;  // absent only for dispersion_audit
  SolverBlock solver;
  InitialBlock initial;
  OutputBlock output;

  bool operator==(const ScenarioConfig&) const = default;
};

struct ConfigIssue {
  std::string field;
  std::string message;
};

// Every problem found in one document.
class ScenarioConfigError : public ConfigError {
 public:
  explicit ScenarioConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

// YAML document to config, with defaults filled in; throws ScenarioConfigError.
ScenarioConfig parse_scenario(const std::string& text);
std::string emit_scenario(const ScenarioConfig& config);

// Closest candidate by edit distance.
std::string nearest(const std::string& word, const std::vector<std::string>& candidates);

// 0 success, 2 configuration, 3 non-convergence, 4 singular or non-hyperbolic.
int exit_code(ErrorKind kind);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string str() const;
};

enum class Action { automatic, solve, propagate, dispersion };

struct RunReport {
  nlohmann::json document;
  CsvTable table;
  int exit_code = 0;

  std::string digest() const { return document.at("report_digest").get<std::string>(); }
};

// Never throws for solver failures: they become the report's error object.
RunReport run_scenario(const ScenarioConfig& config, Action action = Action::automatic);

// Report for a document that failed to parse.
RunReport config_error_report(const ScenarioConfigError& error);

std::string sha256_hex(const std::string& bytes);
// Digest of everything except the wall time and the digest field itself.
std::string report_digest(const nlohmann::json& report);

// Level-by-level energy deltas and state overlap deficits 1 - |<a|b>| of two spectrum
// reports; throws UsageError for other payloads.
nlohmann::json compare_reports(const nlohmann::json& a, const nlohmann::json& b);

struct SweepResult {
  CsvTable table;
  std::vector<RunReport> reports;
  int exit_code = 0;
};

// A scenario document with an extra `sweep: {parameter: a.b, values: [...]}` block.
// Cells run on up to `jobs` threads; rows keep the order of `values`.
SweepResult run_sweep(const std::string& text, std::size_t jobs, Action action = Action::automatic);

}  // namespace wavekit::scenario
