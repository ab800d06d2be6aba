#include "wavekit/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include "wavekit/modified_nr.hpp"
#include "wavekit/modified_rel.hpp"
#include "wavekit/planewave.hpp"
#include "wavekit/reference.hpp"
#include "wavekit/spin_half.hpp"

namespace wavekit::scenario {

using nlohmann::json;

namespace {

const std::vector<std::pair<Equation, std::string>>& equation_table() {
  static const std::vector<std::pair<Equation, std::string>> table{
      {Equation::schrodinger, "schrodinger"},
      {Equation::modified_nr_stationary, "modified_nr_stationary"},
      {Equation::modified_nr_timedep, "modified_nr_timedep"},
      {Equation::modified_rel_stationary, "modified_rel_stationary"},
      {Equation::modified_rel_timedep, "modified_rel_timedep"},
      {Equation::spin_half_stationary, "spin_half_stationary"},
      {Equation::massless_spin_half, "massless_spin_half"},
      {Equation::dispersion_audit, "dispersion_audit"},
  };
  return table;
}

std::string shortest(double x) {
  if (std::isnan(x)) return ".nan";
  if (std::isinf(x)) return x > 0 ? ".inf" : "-.inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

// Collects every problem instead of stopping at the first.
class Reader {
 public:
  std::vector<ConfigIssue> issues;

  void fail(const std::string& field, const std::string& message) { issues.push_back({field, message}); }

  template <typename T>
  std::optional<T> get(const YAML::Node& node, const std::string& block, const char* key) {
    const YAML::Node v = node[key];
    if (!v.IsDefined() || v.IsNull()) return std::nullopt;
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      fail(block + "." + key, std::string("expected ") + type_label<T>());
      return std::nullopt;
    }
  }

  template <typename T>
  void read(const YAML::Node& node, const std::string& block, const char* key, T& out) {
    if (auto v = get<T>(node, block, key)) out = *v;
  }

  template <typename T>
  void read(const YAML::Node& node, const std::string& block, const char* key, std::optional<T>& out) {
    if (auto v = get<T>(node, block, key)) out = *v;
  }

  void choice(const YAML::Node& node, const std::string& block, const char* key, std::string& out,
              const std::vector<std::string>& allowed) {
    auto v = get<std::string>(node, block, key);
    if (!v) return;
    if (std::find(allowed.begin(), allowed.end(), *v) == allowed.end()) {
      fail(block + "." + key,
           "unknown value '" + *v + "' (expected one of " + join(allowed, ", ") + "; did you mean '" +
               nearest(*v, allowed) + "'?)");
      return;
    }
    out = *v;
  }

  void keys(const YAML::Node& node, const std::string& block, const std::vector<std::string>& allowed) {
    if (!node.IsMap()) {
      fail(block, "expected a mapping");
      return;
    }
    for (const auto& kv : node) {
      const std::string k = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
        fail(block.empty() ? k : block + "." + k,
             "unknown key (did you mean '" + nearest(k, allowed) + "'?)");
      }
    }
  }

  template <typename T>
  static const char* type_label() {
    if constexpr (std::is_same_v<T, double>) return "a number";
    if constexpr (std::is_same_v<T, long long> || std::is_same_v<T, int>) return "an integer";
    if constexpr (std::is_same_v<T, bool>) return "true or false";
    if constexpr (std::is_same_v<T, std::string>) return "a string";
    return "a list of numbers";
  }
};

// Reads a size_t without letting a negative number wrap around.
void read_count(Reader& r, const YAML::Node& node, const std::string& block, const char* key, std::size_t& out,
                std::size_t minimum) {
  auto v = r.get<long long>(node, block, key);
  if (!v) return;
  if (*v < static_cast<long long>(minimum)) {
    r.fail(block + "." + key, "must be >= " + std::to_string(minimum));
    return;
  }
  out = static_cast<std::size_t>(*v);
}

PotentialSpec read_potential(Reader& r, const YAML::Node& node) {
  const std::string block = "potential";
  std::string type;
  if (!node.IsMap()) {
    r.fail(block, "expected a mapping");
    return {};
  }
  static const std::vector<std::string> types{"free",     "constant", "square_well",        "step",     "barrier",
                                              "harmonic", "coulomb",  "piecewise_constant", "tabulated"};
  if (!node["type"]) {
    r.fail(block + ".type", "missing");
    return {};
  }
  r.choice(node, block, "type", type, types);
  if (type.empty()) return {};

  static const std::map<std::string, std::vector<std::string>> fields{
      {"free", {}},
      {"constant", {"value"}},
      {"square_well", {"depth", "half_width", "center"}},
      {"step", {"height", "edge", "center"}},
      {"barrier", {"height", "left", "right", "center"}},
      {"harmonic", {"omega", "mass", "center"}},
      {"coulomb", {"strength"}},
      {"piecewise_constant", {"breakpoints", "values", "center"}},
      {"tabulated", {"positions", "values"}},
  };
  std::vector<std::string> allowed = fields.at(type);
  allowed.push_back("type");
  r.keys(node, block, allowed);

  const std::size_t before = r.issues.size();
  auto need = [&](const char* key) {
    auto v = r.get<double>(node, block, key);
    if (!v && !node[key]) r.fail(block + "." + key, "missing for " + type);
    return v.value_or(0.0);
  };
  auto list = [&](const char* key) {
    auto v = r.get<std::vector<double>>(node, block, key);
    if (!v && !node[key]) r.fail(block + "." + key, "missing for " + type);
    return v.value_or(std::vector<double>{});
  };
  const double center = r.get<double>(node, block, "center").value_or(0.0);
  try {
    PotentialSpec spec;
    if (type == "free") spec = PotentialSpec::free();
    if (type == "constant") spec = PotentialSpec::constant(need("value"));
    if (type == "square_well") spec = PotentialSpec::square_well(need("depth"), need("half_width"), center);
    if (type == "step") spec = PotentialSpec::step(need("height"), need("edge"), center);
    if (type == "barrier") spec = PotentialSpec::barrier(need("height"), need("left"), need("right"), center);
    if (type == "harmonic") {
      spec = PotentialSpec::harmonic(need("omega"), r.get<double>(node, block, "mass").value_or(1.0), center);
    }
    if (type == "coulomb") spec = PotentialSpec::coulomb(need("strength"));
    if (type == "piecewise_constant") {
      auto b = list("breakpoints");
      auto v = list("values");
      if (r.issues.size() == before) spec = PotentialSpec::piecewise_constant(b, v, center);
    }
    if (type == "tabulated") {
      auto p = list("positions");
      auto v = list("values");
      if (r.issues.size() == before) spec = PotentialSpec::tabulated(p, v);
    }
    return spec;
  } catch (const Error& e) {
    if (r.issues.size() == before) r.fail(block, e.what());
  }
  return {};
}

GridBlock read_grid(Reader& r, const YAML::Node& node) {
  GridBlock g;
  const std::string block = "grid";
  r.keys(node, block, {"kind", "boundary", "x_min", "x_max", "r_max", "n_points"});
  if (!node.IsMap()) return g;
  std::string kind = "line", boundary = "dirichlet";
  r.choice(node, block, "kind", kind, {"line", "radial"});
  r.choice(node, block, "boundary", boundary, {"dirichlet", "periodic"});
  g.kind = kind == "radial" ? GridKind::radial : GridKind::line;
  g.boundary = boundary == "periodic" ? Boundary::periodic : Boundary::dirichlet;
  if (!node["n_points"]) r.fail("grid.n_points", "missing");
  read_count(r, node, block, "n_points", g.n_points, Grid::kMinPoints);
  if (g.kind == GridKind::line) {
    for (const char* k : {"x_min", "x_max"}) {
      if (!node[k]) r.fail(std::string("grid.") + k, "missing for a line grid");
    }
    r.read(node, block, "x_min", g.x_min);
    r.read(node, block, "x_max", g.x_max);
    if (node["x_min"] && node["x_max"] && !(g.x_max > g.x_min)) r.fail("grid.x_max", "must exceed x_min");
  } else {
    if (!node["r_max"]) r.fail("grid.r_max", "missing for a radial grid");
    r.read(node, block, "r_max", g.r_max);
    if (node["r_max"] && !(g.r_max > 0.0)) r.fail("grid.r_max", "must be > 0");
    if (boundary == "periodic") r.fail("grid.boundary", "radial grids are dirichlet");
  }
  return g;
}

void read_solver(Reader& r, const YAML::Node& node, SolverBlock& s) {
  const std::string block = "solver";
  r.keys(node, block,
         {"method", "model", "n_states", "state_index", "tol", "max_iter", "damping", "acceleration",
          "energy_init", "bracket", "scan_points", "policy", "floor", "order", "l", "wilson_r", "dt", "steps",
          "energy", "epsilon", "momenta", "additional_term"});
  if (!node.IsMap()) return;
  r.choice(node, block, "method", s.method, {"fixed_point", "shooting"});
  r.choice(node, block, "model", s.model, {"continuum", "lattice"});
  r.choice(node, block, "acceleration", s.acceleration, {"none", "newton"});
  r.choice(node, block, "policy", s.policy, {"reject", "clamp"});
  read_count(r, node, block, "n_states", s.n_states, 1);
  read_count(r, node, block, "state_index", s.state_index, 0);
  read_count(r, node, block, "max_iter", s.max_iter, 1);
  read_count(r, node, block, "scan_points", s.scan_points, 2);
  read_count(r, node, block, "steps", s.steps, 1);
  r.read(node, block, "tol", s.tol);
  r.read(node, block, "damping", s.damping);
  r.read(node, block, "energy_init", s.energy_init);
  r.read(node, block, "floor", s.floor);
  r.read(node, block, "order", s.order);
  r.read(node, block, "l", s.l);
  r.read(node, block, "wilson_r", s.wilson_r);
  r.read(node, block, "dt", s.dt);
  r.read(node, block, "energy", s.energy);
  r.read(node, block, "epsilon", s.epsilon);
  r.read(node, block, "momenta", s.momenta);
  r.read(node, block, "additional_term", s.additional_term);
  if (auto b = r.get<std::vector<double>>(node, block, "bracket")) {
    if (b->size() != 2 || !((*b)[0] < (*b)[1])) {
      r.fail("solver.bracket", "expected [lo, hi] with lo < hi");
    } else {
      s.bracket = std::make_pair((*b)[0], (*b)[1]);
    }
  }
  if (!(s.tol > 0.0)) r.fail("solver.tol", "tolerance must be > 0");
  if (s.floor < 0.0) r.fail("solver.floor", "must be >= 0");
  if (!(s.damping > 0.0 && s.damping <= 1.0)) r.fail("solver.damping", "must lie in (0, 1]");
  if (s.order != 2 && s.order != 4) r.fail("solver.order", "must be 2 or 4");
  if (s.l < 0) r.fail("solver.l", "must be >= 0");
  if (!(s.wilson_r >= 0.0)) r.fail("solver.wilson_r", "must be >= 0");
  if (s.dt && !(*s.dt > 0.0)) r.fail("solver.dt", "must be > 0");
}

void read_initial(Reader& r, const YAML::Node& node, InitialBlock& in) {
  const std::string block = "initial";
  r.keys(node, block, {"type", "x0", "sigma", "p0"});
  if (!node.IsMap()) return;
  r.choice(node, block, "type", in.type, {"gaussian", "plane_wave"});
  r.read(node, block, "x0", in.x0);
  r.read(node, block, "sigma", in.sigma);
  r.read(node, block, "p0", in.p0);
  if (in.sigma && !(*in.sigma > 0.0)) r.fail("initial.sigma", "must be > 0");
}

void read_output(Reader& r, const YAML::Node& node, OutputBlock& out) {
  const std::string block = "output";
  r.keys(node, block, {"path", "format", "frame_stride", "include_states"});
  if (!node.IsMap()) return;
  r.read(node, block, "path", out.path);
  r.choice(node, block, "format", out.format, {"json", "csv"});
  read_count(r, node, block, "frame_stride", out.frame_stride, 1);
  r.read(node, block, "include_states", out.include_states);
}

void emit_potential(YAML::Emitter& e, const PotentialSpec& spec) {
  auto num = [&](const char* k, double v) { e << YAML::Key << k << YAML::Value << shortest(v); };
  auto seq = [&](const char* k, const std::vector<double>& v) {
    e << YAML::Key << k << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double x : v) e << shortest(x);
    e << YAML::EndSeq;
  };
  e << YAML::Key << "potential" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "type" << YAML::Value << spec.type_name();
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, potential::SquareWell>) {
          num("depth", p.depth);
          num("half_width", p.half_width);
        } else if constexpr (std::is_same_v<T, potential::Step>) {
          num("height", p.height);
          num("edge", p.edge);
        } else if constexpr (std::is_same_v<T, potential::Barrier>) {
          num("height", p.height);
          num("left", p.left);
          num("right", p.right);
        } else if constexpr (std::is_same_v<T, potential::Harmonic>) {
          num("omega", p.omega);
          num("mass", p.mass);
        } else if constexpr (std::is_same_v<T, potential::Coulomb>) {
          num("strength", p.strength);
        } else if constexpr (std::is_same_v<T, potential::PiecewiseConstant>) {
          seq("breakpoints", p.breakpoints);
          seq("values", p.values);
        } else if constexpr (std::is_same_v<T, potential::Tabulated>) {
          seq("positions", p.positions);
          seq("values", p.values);
        }
      },
      spec.variant);
  const bool centered = !std::holds_alternative<potential::Free>(spec.variant) &&
                        !std::holds_alternative<potential::Coulomb>(spec.variant) &&
                        !std::holds_alternative<potential::Tabulated>(spec.variant);
  if (centered) num("center", spec.center);
  e << YAML::EndMap;
}

// ---- running ----

json field_json(const WaveField& f) {
  json re = json::array(), im = json::array();
  for (const complex& z : f.values) {
    re.push_back(z.real());
    im.push_back(z.imag());
  }
  return {{"re", re}, {"im", im}};
}

json positions_json(const Grid& grid) { return grid.positions(); }

json diagnostics_json(const std::map<std::string, double>& d) {
  json out = json::object();
  for (const auto& [k, v] : d) out[k] = v;
  return out;
}

struct Level {
  double energy;
  std::size_t nodes;
  double residual;
};

const std::vector<std::string> kSpectrumHeader{"index", "energy", "node_count", "self_consistency_residual"};

json spectrum_result(const std::vector<Level>& levels, CsvTable& table) {
  json arr = json::array();
  table.header = kSpectrumHeader;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    arr.push_back({{"index", i},
                   {"energy", levels[i].energy},
                   {"node_count", levels[i].nodes},
                   {"self_consistency_residual", levels[i].residual}});
    table.rows.push_back({std::to_string(i), shortest(levels[i].energy), std::to_string(levels[i].nodes),
                          shortest(levels[i].residual)});
  }
  return {{"kind", "spectrum"}, {"levels", arr}};
}

WaveField initial_field(const ScenarioConfig& c, const Grid& grid) {
  const double mid = 0.5 * (grid.x_min() + grid.x_max());
  const double x0 = c.initial.x0.value_or(grid.kind() == GridKind::radial ? 0.5 * grid.x_max() : mid);
  const double sigma = c.initial.sigma.value_or(grid.box_length() / 20.0);
  const double k0 = c.initial.p0 / c.units.hbar;
  WaveField psi(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.is_active(i)) continue;
    const double x = grid.x(i);
    const double envelope = c.initial.type == "plane_wave" ? 1.0 : std::exp(-0.25 * std::pow((x - x0) / sigma, 2));
    psi[i] = envelope * std::exp(complex(0.0, k0 * x));
  }
  return normalized(std::move(psi));
}

void frames_table(const std::vector<double>& times, const std::vector<WaveField>& upper,
                  const std::vector<WaveField>& lower, CsvTable& table) {
  table.header = {"t", "x", "re_psi", "im_psi"};
  if (!lower.empty()) {
    table.header.push_back("re_psi2");
    table.header.push_back("im_psi2");
  }
  for (std::size_t f = 0; f < upper.size(); ++f) {
    const Grid& g = upper[f].grid;
    for (std::size_t i = 0; i < g.size(); ++i) {
      std::vector<std::string> row{shortest(times[f]), shortest(g.x(i)), shortest(upper[f][i].real()),
                                   shortest(upper[f][i].imag())};
      if (!lower.empty()) {
        row.push_back(shortest(lower[f][i].real()));
        row.push_back(shortest(lower[f][i].imag()));
      }
      table.rows.push_back(std::move(row));
    }
  }
}

json trajectory_result(const Trajectory& traj, double dt, std::size_t steps) {
  return {{"kind", "trajectory"},
          {"dt", dt},
          {"steps", steps},
          {"t_final", traj.times.empty() ? 0.0 : traj.times.back()},
          {"frames", traj.frames.size()},
          {"norm_initial", traj.norms.empty() ? 0.0 : traj.norms.front()},
          {"norm_final", traj.norms.empty() ? 0.0 : traj.norms.back()}};
}

modified_nr::Regularization guard_of(const SolverBlock& s) {
  modified_nr::Regularization g;
  g.mode = s.policy == "clamp" ? modified_nr::Regularization::Mode::clamp : modified_nr::Regularization::Mode::reject;
  g.floor = s.floor;
  return g;
}

modified_nr::ShootingOptions shooting_of(const SolverBlock& s) {
  modified_nr::ShootingOptions o;
  o.model = s.model == "lattice" ? modified_nr::ShootingOptions::Model::lattice
                                 : modified_nr::ShootingOptions::Model::continuum;
  o.scan_points = s.scan_points;
  return o;
}

std::pair<double, double> require_bracket(const SolverBlock& s) {
  if (!s.bracket) throw ConfigError("solver.bracket is required for shooting");
  return *s.bracket;
}

json run_schrodinger(const ScenarioConfig& c, const Grid& grid, json& diag, CsvTable& table) {
  reference::SchrodingerOptions opt;
  opt.order = c.solver.order;
  opt.l = c.solver.l;
  const SpectrumResult sp = reference::solve_schrodinger_stationary(grid, c.potential, c.solver.n_states, c.units, opt);
  std::vector<Level> levels;
  for (std::size_t i = 0; i < sp.energies.size(); ++i) levels.push_back({sp.energies[i], sp.node_counts[i], 0.0});
  json result = spectrum_result(levels, table);
  if (c.output.include_states) {
    result["x"] = positions_json(grid);
    for (const WaveField& s : sp.states) result["states"].push_back(field_json(s));
  }
  diag.update(diagnostics_json(sp.diagnostics));
  return result;
}

json run_modified_nr(const ScenarioConfig& c, const Grid& grid, json& diag, CsvTable& table) {
  const SolverBlock& s = c.solver;
  std::vector<modified_nr::ModifiedEigenResult> found;
  if (s.method == "shooting") {
    auto [lo, hi] = require_bracket(s);
    auto all = modified_nr::shooting_spectrum(grid, c.potential, lo, hi, c.units, shooting_of(s));
    if (all.empty()) throw NoRootError("no root of the matching function in the bracket");
    for (std::size_t i = 0; i < all.size() && i < s.n_states; ++i) found.push_back(std::move(all[i]));
  } else {
    modified_nr::FixedPointOptions fp;
    fp.damping = s.damping;
    fp.acceleration = s.acceleration == "newton" ? modified_nr::Acceleration::newton : modified_nr::Acceleration::none;
    fp.order = s.order;
    fp.guard = guard_of(s);
    std::vector<double> init = s.energy_init;
    if (init.size() < s.n_states) {
      reference::SchrodingerOptions opt;
      opt.order = s.order;
      const SpectrumResult ref =
          reference::solve_schrodinger_stationary(grid, c.potential, s.state_index + s.n_states, c.units, opt);
      for (std::size_t k = init.size(); k < s.n_states; ++k) init.push_back(ref.energies[s.state_index + k]);
    }
    json histories = json::array();
    for (std::size_t k = 0; k < s.n_states; ++k) {
      found.push_back(modified_nr::solve_stationary_fixed_point(grid, c.potential, s.state_index + k, init[k], s.tol,
                                                                s.max_iter, c.units, fp));
      histories.push_back(found.back().history);
    }
    diag["iterate_history"] = histories;
  }
  std::vector<Level> levels;
  json iterations = json::array();
  for (const auto& r : found) {
    levels.push_back({r.energy, r.node_count, r.self_consistency_residual});
    iterations.push_back(r.iterations);
  }
  diag["method"] = s.method;
  diag["iterations"] = iterations;
  json result = spectrum_result(levels, table);
  if (c.output.include_states) {
    result["x"] = positions_json(grid);
    for (const auto& r : found) result["states"].push_back(field_json(r.state));
  }
  if (s.additional_term) {
    const SpectrumResult ref = reference::solve_schrodinger_stationary(grid, c.potential, 1, c.units);
    const auto rep = modified_nr::additional_term_report(ref.states[0], ref.energies[0], c.potential, c.units);
    result["additional_term"] = {{"reference_energy", ref.energies[0]},
                                 {"minus_2V_part", rep.minus_2V_part},
                                 {"pv_part", rep.pv_part},
                                 {"first_order_shift", rep.first_order_shift},
                                 {"shift_ratio", rep.shift_ratio},
                                 {"pv_flag", rep.pv_flag},
                                 {"pv_converged", rep.pv_converged},
                                 {"poles", rep.poles.locations},
                                 {"excision_radii", rep.excision_radii},
                                 {"excision_values", rep.excision_values}};
  }
  return result;
}

json run_modified_rel(const ScenarioConfig& c, const Grid& grid, json& diag, CsvTable& table) {
  const modified_rel::RelScenario sc{c.units, c.potential, grid};
  auto [lo, hi] = require_bracket(c.solver);
  auto all = modified_rel::rel_spectrum(sc, lo, hi, shooting_of(c.solver));
  if (all.empty()) throw NoRootError("no root of the matching function in the bracket");
  std::vector<Level> levels;
  for (std::size_t i = 0; i < all.size() && i < c.solver.n_states; ++i) {
    levels.push_back({all[i].energy, all[i].node_count, all[i].self_consistency_residual});
  }
  diag["epsilon_definition_conflict"] = modified_rel::epsilon_definition_conflict(sc);
  json result = spectrum_result(levels, table);
  if (c.output.include_states) {
    result["x"] = positions_json(grid);
    for (std::size_t i = 0; i < levels.size(); ++i) result["states"].push_back(field_json(all[i].state));
  }
  return result;
}

json run_spinor_spectrum(const ScenarioConfig& c, const Grid& grid, bool massless, json& diag, CsvTable& table) {
  const spin_half::SpinorSpectrum sp =
      massless ? spin_half::solve_massless(grid, c.potential, c.units, c.solver.n_states)
               : spin_half::solve_spin_half_stationary(grid, c.potential, c.units, c.solver.wilson_r, c.solver.n_states);
  std::vector<Level> levels;
  for (std::size_t i = 0; i < sp.energies.size(); ++i) {
    levels.push_back({sp.energies[i], count_nodes(WaveField(grid, sp.states[i].upper)), 0.0});
  }
  diag.update(diagnostics_json(sp.diagnostics));
  json result = spectrum_result(levels, table);
  if (c.output.include_states) {
    result["x"] = positions_json(grid);
    for (const auto& s : sp.states) {
      json f = field_json(WaveField(grid, s.upper));
      json g = field_json(WaveField(grid, s.lower));
      f["re2"] = g["re"];
      f["im2"] = g["im"];
      result["states"].push_back(f);
    }
  }
  return result;
}

json run_propagation(const ScenarioConfig& c, const Grid& grid, json& diag, CsvTable& table) {
  const SolverBlock& s = c.solver;
  const std::size_t stride = c.output.frame_stride;
  const WaveField psi0 = initial_field(c, grid);
  Trajectory traj;
  double dt = 0.0;
  switch (c.equation) {
    case Equation::schrodinger: {
      dt = s.dt.value_or(c.units.m * grid.spacing() * grid.spacing() / c.units.hbar);
      traj = reference::propagate_schrodinger(psi0, c.potential, dt, s.steps, c.units, stride);
      break;
    }
    case Equation::modified_nr_timedep: {
      if (!s.energy) throw ConfigError("solver.energy (E) is required for modified_nr_timedep");
      double eps = 0.0;
      if (s.epsilon) {
        eps = *s.epsilon;
      } else if (c.initial.type == "plane_wave") {
        eps = c.initial.p0 * c.initial.p0 / (2.0 * c.units.m);
      } else {
        throw ConfigError("solver.epsilon is required unless the initial data is a plane wave");
      }
      modified_nr::TimeDepState st{psi0, WaveField(grid), 0.0, *s.energy, eps};
      for (std::size_t i = 0; i < grid.size(); ++i) st.dpsi_dt[i] = complex(0.0, -eps / c.units.hbar) * psi0[i];
      const auto speed = modified_nr::wave_speed_squared(c.potential, *s.energy, eps, grid, c.units);
      dt = s.dt.value_or(modified_nr::max_stable_dt(speed, grid));
      traj = modified_nr::propagate_timedep(st, c.potential, dt, s.steps, c.units, stride);
      diag["epsilon"] = eps;
      break;
    }
    case Equation::modified_rel_timedep: {
      const modified_rel::RelScenario sc{c.units, c.potential, grid};
      const double omega = reference::klein_gordon_energy(c.initial.p0, c.units.rest_energy(), c.units.c) / c.units.hbar;
      WaveField v0(grid);
      for (std::size_t i = 0; i < grid.size(); ++i) v0[i] = complex(0.0, -omega) * psi0[i];
      dt = s.dt.value_or(modified_rel::max_stable_dt(sc));
      traj = modified_rel::propagate_rel_timedep(psi0, v0, sc, dt, s.steps, stride);
      break;
    }
    case Equation::massless_spin_half: {
      spin_half::SpinorField phi(grid);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        phi.upper[i] = psi0[i] / std::numbers::sqrt2;
        phi.lower[i] = psi0[i] / std::numbers::sqrt2;
      }
      double bmin = 1.0;
      for (double v : sample(c.potential, grid)) bmin = std::min(bmin, 1.0 + v / c.units.rest_energy());
      dt = s.dt.value_or(0.5 * grid.spacing() * std::max(bmin, 0.0) / c.units.c);
      if (!(dt > 0.0)) throw InvalidScenarioError("weight 1 + V/E0 is not positive on the grid");
      const spin_half::SpinorTrajectory st = spin_half::propagate_massless(phi, c.potential, dt, s.steps, c.units, stride);
      traj.times = st.times;
      traj.norms = st.norms;
      traj.diagnostics = st.diagnostics;
      for (const auto& f : st.frames) {
        traj.frames.emplace_back(grid, f.upper);
        traj.lower_frames.emplace_back(grid, f.lower);
      }
      break;
    }
    default:
      throw ConfigError(std::string("equation ") + to_string(c.equation) + " has no time evolution");
  }
  diag.update(diagnostics_json(traj.diagnostics));
  frames_table(traj.times, traj.frames, traj.lower_frames, table);
  return trajectory_result(traj, dt, s.steps);
}

json run_dispersion(const ScenarioConfig& c, CsvTable& table) {
  if (!c.potential.is_piecewise_constant()) throw ConfigError("dispersion_audit needs a free or constant potential");
  double v = 0.0;
  if (const auto* pc = std::get_if<potential::PiecewiseConstant>(&c.potential.variant)) {
    if (!pc->breakpoints.empty()) throw ConfigError("dispersion_audit needs a free or constant potential");
    v = pc->values.front();
  } else if (!std::holds_alternative<potential::Free>(c.potential.variant)) {
    throw ConfigError("dispersion_audit needs a free or constant potential");
  }
  const UnitSystem& u = c.units;
  std::vector<double> momenta = c.solver.momenta;
  if (momenta.empty()) momenta = {0.5, 1.0, 2.0};
  table.header = {"p", "relation", "branch", "energy", "residual"};
  json rows = json::array();
  auto add = [&](double p, const char* relation, const char* branch, double e, double residual) {
    rows.push_back({{"p", p}, {"relation", relation}, {"branch", branch}, {"energy", e}, {"residual", residual}});
    table.rows.push_back({shortest(p), relation, branch, shortest(e), shortest(residual)});
  };
  using planewave::Branch;
  for (double p : momenta) {
    const double eps_nr = planewave::free_energy_nr(p, u);
    add(p, "schrodinger", "positive", eps_nr + v, 0.0);
    const auto nr = planewave::modified_nr_energies(p, v, u);
    for (auto [branch, e] : {std::pair{"lower", nr.lower}, std::pair{"upper", nr.upper}}) {
      const double res = std::isnan(e) ? NAN : planewave::residual_nr_stationary({p, eps_nr, e, v}, u);
      add(p, "modified_nr", branch, e, res);
    }
    const double e_rel = planewave::modified_rel_energy(p, v, u, Branch::positive);
    add(p, "modified_rel", "positive", e_rel,
        planewave::residual_rel_stationary({p, planewave::free_energy_rel(p, u), e_rel, v}, u));
    for (auto [name, b] : {std::pair{"positive", Branch::positive}, std::pair{"negative", Branch::negative}}) {
      const double es = planewave::spin_half_energy(p, v, u, b);
      add(p, "spin_half", name, es, planewave::residual_spin_half({p, 0.0, es, v}, u, b));
      const double em = planewave::massless_energy(p, v, u, b);
      add(p, "massless", name, em, planewave::residual_massless({p, 0.0, em, v}, u, b));
    }
  }
  return {{"kind", "residual_table"}, {"potential", v}, {"rows", rows}};
}

json error_json(const Error& e) {
  json err{{"kind", to_string(e.kind())}, {"message", e.what()}, {"exit_code", exit_code(e.kind())}};
  if (const auto* s = dynamic_cast<const SingularRegionError*>(&e)) {
    err["singular_set"] = {{"kind", to_string(s->singular_set().kind)},
                           {"energy", s->singular_set().energy},
                           {"locations", s->singular_set().locations}};
  }
  if (const auto* n = dynamic_cast<const NonConvergenceError*>(&e)) err["history"] = n->history();
  if (const auto* n = dynamic_cast<const StateTrackingError*>(&e)) err["history"] = n->history();
  if (const auto* n = dynamic_cast<const NonHyperbolicError*>(&e)) err["offending_positions"] = n->offending_positions();
  if (const auto* n = dynamic_cast<const ScenarioConfigError*>(&e)) {
    for (const auto& i : n->issues()) err["issues"].push_back({{"field", i.field}, {"message", i.message}});
  }
  return err;
}

Action default_action(Equation eq) {
  switch (eq) {
    case Equation::modified_nr_timedep:
    case Equation::modified_rel_timedep:
      return Action::propagate;
    case Equation::dispersion_audit:
      return Action::dispersion;
    default:
      return Action::solve;
  }
}

bool allowed(Action action, Equation eq) {
  switch (action) {
    case Action::solve:
      return eq == Equation::schrodinger || eq == Equation::modified_nr_stationary ||
             eq == Equation::modified_rel_stationary || eq == Equation::spin_half_stationary ||
             eq == Equation::massless_spin_half;
    case Action::propagate:
      return eq == Equation::schrodinger || eq == Equation::modified_nr_timedep ||
             eq == Equation::modified_rel_timedep || eq == Equation::massless_spin_half;
    case Action::dispersion:
      return eq == Equation::dispersion_audit;
    case Action::automatic:
      return true;
  }
  return false;
}

const char* action_name(Action a) {
  switch (a) {
    case Action::solve:
      return "solve";
    case Action::propagate:
      return "propagate";
    case Action::dispersion:
      return "dispersion";
    case Action::automatic:
      break;
  }
  return "automatic";
}

json scenario_echo(const ScenarioConfig& c) {
  YAML::Node node = YAML::Load(emit_scenario(c));
  std::function<json(const YAML::Node&)> convert = [&](const YAML::Node& n) -> json {
    if (n.IsMap()) {
      json o = json::object();
      for (const auto& kv : n) o[kv.first.as<std::string>()] = convert(kv.second);
      return o;
    }
    if (n.IsSequence()) {
      json a = json::array();
      for (const auto& x : n) a.push_back(convert(x));
      return a;
    }
    if (n.IsScalar()) {
      const std::string& s = n.Scalar();
      if (n.Tag() != "!") {
        if (s == "true") return true;
        if (s == "false") return false;
        double d;
        auto res = std::from_chars(s.data(), s.data() + s.size(), d);
        if (res.ec == std::errc() && res.ptr == s.data() + s.size()) return d;
      }
      return s;
    }
    return nullptr;
  };
  return convert(node);
}

void finish(RunReport& report, double wall) {
  report.document["diagnostics"]["wall_time_s"] = wall;
  report.document["report_digest"] = report_digest(report.document);
}

}  // namespace

const char* to_string(Equation equation) {
  for (const auto& [e, name] : equation_table()) {
    if (e == equation) return name.c_str();
  }
  return "unknown";
}

const std::vector<std::string>& equation_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out;
    for (const auto& [e, name] : equation_table()) out.push_back(name);
    return out;
  }();
  return ids;
}

bool relativistic_by_default(Equation equation) {
  return equation == Equation::modified_rel_stationary || equation == Equation::modified_rel_timedep ||
         equation == Equation::spin_half_stationary || equation == Equation::massless_spin_half;
}

Grid GridBlock::build() const {
  if (kind == GridKind::radial) return Grid::radial(r_max, n_points);
  return Grid::line(x_min, x_max, n_points, boundary);
}

ScenarioConfigError::ScenarioConfigError(std::vector<ConfigIssue> issues)
    : ConfigError([&] {
        std::vector<std::string> lines;
        for (const auto& i : issues) lines.push_back(i.field + ": " + i.message);
        return "invalid scenario (" + std::to_string(issues.size()) + " problem" + (issues.size() == 1 ? "" : "s") +
               "): " + join(lines, "; ");
      }()),
      issues_(std::move(issues)) {}

std::string nearest(const std::string& word, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const std::string& c : candidates) {
    std::vector<std::size_t> row(c.size() + 1);
    for (std::size_t j = 0; j <= c.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= word.size(); ++i) {
      std::size_t diag = row[0];
      row[0] = i;
      for (std::size_t j = 1; j <= c.size(); ++j) {
        const std::size_t up = row[j];
        row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (word[i - 1] == c[j - 1] ? 0 : 1)});
        diag = up;
      }
    }
    if (row[c.size()] < best_d) {
      best_d = row[c.size()];
      best = c;
    }
  }
  return best;
}

ScenarioConfig parse_scenario(const std::string& text) {
  Reader r;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ScenarioConfigError(std::vector<ConfigIssue>{{"document", std::string("not valid YAML: ") + e.what()}});
  }
  if (!root.IsMap()) throw ScenarioConfigError(std::vector<ConfigIssue>{{"document", "expected a mapping of blocks"}});

  ScenarioConfig c;
  r.keys(root, "", {"equation", "units", "potential", "grid", "solver", "initial", "output"});

  bool equation_known = false;
  if (!root["equation"]) {
    r.fail("equation", "missing");
  } else if (auto id = r.get<std::string>(root, "", "equation")) {
    const auto& ids = equation_ids();
    const auto it = std::find(ids.begin(), ids.end(), *id);
    if (it == ids.end()) {
      r.fail("equation", "unknown equation id '" + *id + "'; did you mean '" + nearest(*id, ids) + "'?");
    } else {
      c.equation = equation_table()[static_cast<std::size_t>(it - ids.begin())].first;
      equation_known = true;
    }
  }

  c.relativistic = equation_known && relativistic_by_default(c.equation);
  std::optional<double> c_given;
  if (const YAML::Node u = root["units"]) {
    r.keys(u, "units", {"hbar", "m", "c", "e", "relativistic", "energy_label", "length_label"});
    if (u.IsMap()) {
      r.read(u, "units", "relativistic", c.relativistic);
      r.read(u, "units", "hbar", c.units.hbar);
      r.read(u, "units", "m", c.units.m);
      r.read(u, "units", "e", c.units.e);
      r.read(u, "units", "energy_label", c.units.energy_label);
      r.read(u, "units", "length_label", c.units.length_label);
      c_given = r.get<double>(u, "units", "c");
    }
  }
  c.units.c = c_given.value_or(c.relativistic ? kAtomicC : 1.0);
  for (auto [name, v] : {std::pair{"hbar", c.units.hbar}, std::pair{"m", c.units.m}, std::pair{"c", c.units.c}}) {
    if (!(std::isfinite(v) && v > 0.0)) r.fail(std::string("units.") + name, "must be finite and > 0");
  }

  if (!root["potential"]) {
    r.fail("potential", "missing block");
  } else {
    c.potential = read_potential(r, root["potential"]);
  }

  if (root["grid"]) {
    c.grid = read_grid(r, root["grid"]);
  } else if (!equation_known || c.equation != Equation::dispersion_audit) {
    r.fail("grid", "missing block");
  }

  if (root["solver"]) read_solver(r, root["solver"], c.solver);
  if (root["initial"]) read_initial(r, root["initial"], c.initial);
  if (root["output"]) read_output(r, root["output"], c.output);

  if (!r.issues.empty()) throw ScenarioConfigError(std::move(r.issues));
  return c;
}

std::string emit_scenario(const ScenarioConfig& c) {
  YAML::Emitter e;
  auto num = [&](const char* k, double v) { e << YAML::Key << k << YAML::Value << shortest(v); };
  auto count = [&](const char* k, std::size_t v) { e << YAML::Key << k << YAML::Value << v; };
  auto str = [&](const char* k, const std::string& v) { e << YAML::Key << k << YAML::Value << v; };
  auto flag = [&](const char* k, bool v) { e << YAML::Key << k << YAML::Value << YAML::TrueFalseBool << v; };
  auto seq = [&](const char* k, const std::vector<double>& v) {
    e << YAML::Key << k << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double x : v) e << shortest(x);
    e << YAML::EndSeq;
  };

  e << YAML::BeginMap;
  str("equation", to_string(c.equation));

  e << YAML::Key << "units" << YAML::Value << YAML::BeginMap;
  num("hbar", c.units.hbar);
  num("m", c.units.m);
  num("c", c.units.c);
  num("e", c.units.e);
  flag("relativistic", c.relativistic);
  e << YAML::Key << "energy_label" << YAML::Value << YAML::DoubleQuoted << c.units.energy_label;
  e << YAML::Key << "length_label" << YAML::Value << YAML::DoubleQuoted << c.units.length_label;
  e << YAML::EndMap;

  emit_potential(e, c.potential);

  if (c.grid) {
    const GridBlock& g = *c.grid;
    e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    str("kind", g.kind == GridKind::radial ? "radial" : "line");
    if (g.kind == GridKind::line) {
      str("boundary", g.boundary == Boundary::periodic ? "periodic" : "dirichlet");
      num("x_min", g.x_min);
      num("x_max", g.x_max);
    } else {
      num("r_max", g.r_max);
    }
    count("n_points", g.n_points);
    e << YAML::EndMap;
  }

  const SolverBlock& s = c.solver;
  e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  str("method", s.method);
  str("model", s.model);
  count("n_states", s.n_states);
  count("state_index", s.state_index);
  num("tol", s.tol);
  count("max_iter", s.max_iter);
  num("damping", s.damping);
  str("acceleration", s.acceleration);
  seq("energy_init", s.energy_init);
  if (s.bracket) seq("bracket", {s.bracket->first, s.bracket->second});
  count("scan_points", s.scan_points);
  str("policy", s.policy);
  num("floor", s.floor);
  e << YAML::Key << "order" << YAML::Value << s.order;
  e << YAML::Key << "l" << YAML::Value << s.l;
  num("wilson_r", s.wilson_r);
  if (s.dt) num("dt", *s.dt);
  count("steps", s.steps);
  if (s.energy) num("energy", *s.energy);
  if (s.epsilon) num("epsilon", *s.epsilon);
  seq("momenta", s.momenta);
  flag("additional_term", s.additional_term);
  e << YAML::EndMap;

  e << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  str("type", c.initial.type);
  if (c.initial.x0) num("x0", *c.initial.x0);
  if (c.initial.sigma) num("sigma", *c.initial.sigma);
  num("p0", c.initial.p0);
  e << YAML::EndMap;

  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  if (c.output.path) e << YAML::Key << "path" << YAML::Value << YAML::DoubleQuoted << *c.output.path;
  str("format", c.output.format);
  count("frame_stride", c.output.frame_stride);
  flag("include_states", c.output.include_states);
  e << YAML::EndMap;

  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::configuration:
    case ErrorKind::usage:
    case ErrorKind::domain:
    case ErrorKind::out_of_scope:
      return 2;
    case ErrorKind::non_convergence:
    case ErrorKind::state_tracking:
    case ErrorKind::no_root:
    case ErrorKind::stability:
      return 3;
    case ErrorKind::singular_denominator:
    case ErrorKind::singular_region:
    case ErrorKind::non_hyperbolic:
    case ErrorKind::invalid_scenario:
      return 4;
  }
  return 2;
}

std::string CsvTable::str() const {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  };
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + quote(cells[i]);
    out += "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string report_digest(const json& report) {
  json copy = report;
  copy.erase("report_digest");
  if (copy.contains("diagnostics") && copy["diagnostics"].is_object()) copy["diagnostics"].erase("wall_time_s");
  return sha256_hex(copy.dump());
}

RunReport config_error_report(const ScenarioConfigError& error) {
  RunReport report;
  report.exit_code = 2;
  report.document = {{"artifact", {{"name", "wavekit"}, {"version", kVersion}}},
                     {"status", "error"},
                     {"exit_code", 2},
                     {"error", error_json(error)},
                     {"diagnostics", json::object()}};
  finish(report, 0.0);
  return report;
}

RunReport run_scenario(const ScenarioConfig& config, Action action) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  json& doc = report.document;
  const std::string emitted = emit_scenario(config);
  doc["artifact"] = {{"name", "wavekit"}, {"version", kVersion}};
  doc["input_digest"] = sha256_hex(emitted);
  doc["scenario"] = scenario_echo(config);
  doc["diagnostics"] = json::object();
  json& diag = doc["diagnostics"];
  try {
    const Action act = action == Action::automatic ? default_action(config.equation) : action;
    if (!allowed(act, config.equation)) {
      throw ConfigError(std::string("command '") + action_name(act) + "' does not apply to equation " +
                        to_string(config.equation));
    }
    json result;
    if (act == Action::dispersion) {
      result = run_dispersion(config, report.table);
    } else {
      if (!config.grid) throw ConfigError("grid block is required for " + std::string(to_string(config.equation)));
      const Grid grid = config.grid->build();
      check_covers(config.potential, grid);
      if (act == Action::propagate) {
        result = run_propagation(config, grid, diag, report.table);
      } else {
        switch (config.equation) {
          case Equation::schrodinger:
            result = run_schrodinger(config, grid, diag, report.table);
            break;
          case Equation::modified_nr_stationary:
            result = run_modified_nr(config, grid, diag, report.table);
            break;
          case Equation::modified_rel_stationary:
            result = run_modified_rel(config, grid, diag, report.table);
            break;
          case Equation::spin_half_stationary:
            result = run_spinor_spectrum(config, grid, false, diag, report.table);
            break;
          case Equation::massless_spin_half:
            result = run_spinor_spectrum(config, grid, true, diag, report.table);
            break;
          default:
            throw ConfigError("unreachable equation dispatch");
        }
      }
    }
    doc["status"] = "ok";
    doc["exit_code"] = 0;
    doc["result"] = std::move(result);
  } catch (const Error& e) {
    report.exit_code = exit_code(e.kind());
    report.table = {};
    doc["status"] = "error";
    doc["exit_code"] = report.exit_code;
    doc["error"] = error_json(e);
  }
  finish(report, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return report;
}

json compare_reports(const json& a, const json& b) {
  auto kind = [](const json& r) -> std::string {
    if (!r.contains("result") || !r["result"].contains("kind")) return "none";
    return r["result"]["kind"].get<std::string>();
  };
  if (kind(a) != "spectrum" || kind(b) != "spectrum") {
    throw UsageError("compare needs two spectrum reports, got " + kind(a) + " and " + kind(b));
  }
  const json& la = a["result"]["levels"];
  const json& lb = b["result"]["levels"];
  const std::size_t n = std::min(la.size(), lb.size());
  json out{{"kind", "spectrum_delta"}, {"levels", json::array()}, {"warnings", json::array()}};
  if (la.size() != lb.size()) {
    out["warnings"].push_back("spectra differ in length (" + std::to_string(la.size()) + " vs " +
                              std::to_string(lb.size()) + "); compared the first " + std::to_string(n) + " levels");
  }
  const bool states = a["result"].contains("states") && b["result"].contains("states") &&
                      a["result"]["x"] == b["result"]["x"];
  if (!states) out["warnings"].push_back("states missing or on different grids; overlaps not computed");

  auto component = [](const json& s, const char* re, const char* im) {
    std::vector<complex> v;
    if (!s.contains(re)) return v;
    for (std::size_t i = 0; i < s[re].size(); ++i) {
      v.emplace_back(s[re][i].is_null() ? NAN : s[re][i].get<double>(), s[im][i].is_null() ? NAN : s[im][i].get<double>());
    }
    return v;
  };
  double max_d = 0.0, sum_d = 0.0, max_o = 0.0, sum_o = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ea = la[i]["energy"].get<double>(), eb = lb[i]["energy"].get<double>();
    json row{{"index", i}, {"energy_a", ea}, {"energy_b", eb}, {"delta", eb - ea}};
    max_d = std::max(max_d, std::abs(eb - ea));
    sum_d += std::abs(eb - ea);
    if (states && i < a["result"]["states"].size() && i < b["result"]["states"].size()) {
      const json& sa = a["result"]["states"][i];
      const json& sb = b["result"]["states"][i];
      complex dot = 0.0;
      double na = 0.0, nb = 0.0;
      for (auto [re, im] : {std::pair{"re", "im"}, std::pair{"re2", "im2"}}) {
        const auto va = component(sa, re, im), vb = component(sb, re, im);
        for (std::size_t k = 0; k < va.size() && k < vb.size(); ++k) {
          dot += std::conj(va[k]) * vb[k];
          na += std::norm(va[k]);
          nb += std::norm(vb[k]);
        }
      }
      const double deficit = na > 0.0 && nb > 0.0 ? std::max(0.0, 1.0 - std::abs(dot) / std::sqrt(na * nb)) : 1.0;
      row["overlap_deficit"] = deficit;
      max_o = std::max(max_o, deficit);
      sum_o += deficit;
    }
    out["levels"].push_back(row);
  }
  out["max_abs_delta"] = max_d;
  out["mean_abs_delta"] = n ? sum_d / static_cast<double>(n) : 0.0;
  if (states) {
    out["max_overlap_deficit"] = max_o;
    out["mean_overlap_deficit"] = n ? sum_o / static_cast<double>(n) : 0.0;
  }
  return out;
}

SweepResult run_sweep(const std::string& text, std::size_t jobs, Action action) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ScenarioConfigError(std::vector<ConfigIssue>{{"document", std::string("not valid YAML: ") + e.what()}});
  }
  if (!root.IsMap() || !root["sweep"]) throw ScenarioConfigError(std::vector<ConfigIssue>{{"sweep", "missing block"}});
  const YAML::Node sweep = root["sweep"];
  std::vector<ConfigIssue> issues;
  std::string parameter;
  std::vector<YAML::Node> values;
  if (!sweep.IsMap()) {
    issues.push_back({"sweep", "expected a mapping"});
  } else {
    for (const auto& kv : sweep) {
      const std::string k = kv.first.as<std::string>();
      if (k != "parameter" && k != "values") {
        issues.push_back({"sweep." + k, "unknown key (did you mean '" + nearest(k, {"parameter", "values"}) + "'?)"});
      }
    }
    if (!sweep["parameter"] || !sweep["parameter"].IsScalar()) {
      issues.push_back({"sweep.parameter", "missing"});
    } else {
      parameter = sweep["parameter"].as<std::string>();
    }
    if (!sweep["values"] || !sweep["values"].IsSequence()) {
      issues.push_back({"sweep.values", "expected a list"});
    } else {
      for (const auto& v : sweep["values"]) values.push_back(v);
      if (values.empty()) issues.push_back({"sweep.values", "value list is empty"});
    }
  }

  YAML::Node base = YAML::Clone(root);
  base.remove("sweep");
  std::vector<std::string> path;
  if (!parameter.empty()) {
    std::stringstream ss(parameter);
    for (std::string part; std::getline(ss, part, '.');) path.push_back(part);
    YAML::Node cur = YAML::Clone(base);
    bool found = true;
    for (const auto& part : path) {
      if (!cur.IsMap() || !cur[part]) {
        found = false;
        break;
      }
      cur = cur[part];
    }
    if (!found) issues.push_back({"sweep.parameter", "'" + parameter + "' does not exist in the base scenario"});
  }
  if (!issues.empty()) throw ScenarioConfigError(std::move(issues));

  // Cell documents are built up front; workers only parse and run their own text.
  std::vector<std::string> cells;
  std::vector<std::string> labels;
  for (const YAML::Node& v : values) {
    YAML::Node doc = YAML::Clone(base);
    std::vector<YAML::Node> chain{doc};
    for (std::size_t i = 0; i + 1 < path.size(); ++i) chain.push_back(chain.back()[path[i]]);
    chain.back()[path.back()] = YAML::Clone(v);
    YAML::Emitter e;
    e << doc;
    cells.emplace_back(e.c_str());
    YAML::Emitter ev;
    ev << YAML::Flow << v;
    labels.emplace_back(ev.c_str());
  }

  SweepResult out;
  out.reports.resize(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        out.reports[i] = run_scenario(parse_scenario(cells[i]), action);
      } catch (const ScenarioConfigError& e) {
        out.reports[i] = config_error_report(e);
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(jobs, cells.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  out.table.header = {"index", "value", "status", "exit_code", "energy", "levels", "report_digest", "error"};
  std::size_t successes = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const json& d = out.reports[i].document;
    const bool ok = out.reports[i].exit_code == 0;
    successes += ok;
    std::string energy, levels, error;
    if (ok && d["result"]["kind"] == "spectrum" && !d["result"]["levels"].empty()) {
      energy = shortest(d["result"]["levels"][0]["energy"].get<double>());
      levels = std::to_string(d["result"]["levels"].size());
    }
    if (!ok) error = d["error"]["kind"].get<std::string>() + ": " + d["error"]["message"].get<std::string>();
    out.table.rows.push_back({std::to_string(i), labels[i], ok ? "ok" : "error",
                              std::to_string(out.reports[i].exit_code), energy, levels, out.reports[i].digest(), error});
  }
  out.exit_code = successes > 0 ? 0 : 3;
  return out;
}

}  // namespace wavekit::scenario
