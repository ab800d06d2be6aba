#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "wavekit/scenario.hpp"

namespace sc = wavekit::scenario;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string format;
  std::size_t frame_stride = 0;
  std::size_t jobs = 1;
  bool quiet = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw wavekit::ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text, bool quiet) {
  if (path.empty()) {
    if (!quiet) std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw wavekit::ConfigError("cannot write " + path);
  out << text;
}

int emit_report(const sc::RunReport& report, const std::string& path, const std::string& format, bool quiet) {
  if (report.exit_code != 0) {
    std::cerr << "wavekit: " << report.document["error"]["kind"].get<std::string>() << ": "
              << report.document["error"]["message"].get<std::string>() << "\n";
  }
  if (format == "csv" && report.exit_code == 0) {
    write_output(path, report.table.str(), quiet);
  } else {
    write_output(path, report.document.dump(2) + "\n", quiet);
  }
  return report.exit_code;
}

int run(const Flags& f, sc::Action action) {
  sc::ScenarioConfig config;
  try {
    config = sc::parse_scenario(read_file(f.config));
  } catch (const sc::ScenarioConfigError& e) {
    for (const auto& issue : e.issues()) std::cerr << "wavekit: " << issue.field << ": " << issue.message << "\n";
    const sc::RunReport report = sc::config_error_report(e);
    if (!f.out.empty()) write_output(f.out, report.document.dump(2) + "\n", true);
    return 2;
  }
  if (f.frame_stride > 0) config.output.frame_stride = f.frame_stride;
  const std::string path = f.out.empty() ? config.output.path.value_or("") : f.out;
  const std::string format = f.format.empty() ? config.output.format : f.format;
  const sc::RunReport report = sc::run_scenario(config, action);
  return emit_report(report, path, format, f.quiet);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wavekit: modified wave-equation solvers and audits"};
  app.require_subcommand(1);
  Flags f;
  std::string report_a, report_b;

  auto common = [&](CLI::App* cmd, bool with_format) {
    cmd->add_option("--out", f.out, "output path (stdout when omitted)");
    if (with_format) cmd->add_option("--format", f.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    cmd->add_flag("--quiet", f.quiet, "suppress stdout output");
  };
  CLI::App* solve = app.add_subcommand("solve", "stationary spectrum");
  CLI::App* propagate = app.add_subcommand("propagate", "time evolution");
  CLI::App* dispersion = app.add_subcommand("dispersion", "plane-wave dispersion audit");
  CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep");
  CLI::App* compare = app.add_subcommand("compare", "compare two spectrum reports");
  for (CLI::App* cmd : {solve, propagate, dispersion, sweep}) {
    cmd->add_option("--config", f.config, "scenario document")->required();
    common(cmd, true);
  }
  propagate->add_option("--frame-stride", f.frame_stride, "store every k-th frame")->check(CLI::PositiveNumber);
  sweep->add_option("--jobs", f.jobs, "concurrent cells")->check(CLI::PositiveNumber);
  compare->add_option("report_a", report_a)->required();
  compare->add_option("report_b", report_b)->required();
  common(compare, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*solve) return run(f, sc::Action::solve);
    if (*propagate) return run(f, sc::Action::propagate);
    if (*dispersion) return run(f, sc::Action::dispersion);
    if (*compare) {
      const auto a = nlohmann::json::parse(read_file(report_a));
      const auto b = nlohmann::json::parse(read_file(report_b));
      write_output(f.out, sc::compare_reports(a, b).dump(2) + "\n", f.quiet);
      return 0;
    }
    if (*sweep) {
      const sc::SweepResult result = sc::run_sweep(read_file(f.config), f.jobs);
      if (f.format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : result.reports) arr.push_back(r.document);
        write_output(f.out, arr.dump(2) + "\n", f.quiet);
      } else {
        write_output(f.out, result.table.str(), f.quiet);
      }
      return result.exit_code;
    }
  } catch (const sc::ScenarioConfigError& e) {
    for (const auto& issue : e.issues()) std::cerr << "wavekit: " << issue.field << ": " << issue.message << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "wavekit: malformed report: " << e.what() << "\n";
    return 2;
  } catch (const wavekit::Error& e) {
    std::cerr << "wavekit: " << e.what() << "\n";
    return sc::exit_code(e.kind());
  }
  return 2;
}
