// csm: scenario runner for the measurement-calculus library.
// Exit status: 0 all checks passed, 1 some check failed, 2 usage/run error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "csm/errors.hpp"
#include "csm/scenario.hpp"
#include "csm/version.hpp"

namespace {

namespace sc = csm::scenario;

struct RunOptions {
  std::string scenario;
  std::string format = "table";
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;
  std::optional<double> tol;
  std::string out_path;
};

sc::Format parse_format(const std::string& name) {
  if (name == "table") return sc::Format::Table;
  if (name == "json") return sc::Format::Json;
  return sc::Format::Csv;
}

void add_run_flags(CLI::App* cmd, RunOptions& opt) {
  cmd->add_option("scenario", opt.scenario,
                  "scenario file path or bundled fixture name")
      ->required();
  cmd->add_option("--format", opt.format, "output format")
      ->check(CLI::IsMember({"table", "json", "csv"}))
      ->capture_default_str();
  cmd->add_option("--seed", opt.seed, "override the scenario seed");
  cmd->add_option("--samples", opt.samples,
                  "override the Monte Carlo sample count (chain scenarios)");
  cmd->add_option("--tol", opt.tol, "override the scenario tolerance");
  cmd->add_option("--out", opt.out_path, "write the report to a file");
}

int execute(const RunOptions& opt, sc::Kind expected_kind) {
  const sc::Scenario scenario = sc::load_scenario(opt.scenario);
  if (scenario.kind != expected_kind)
    throw csm::WrongScenarioShape(
        std::string("scenario kind '") + sc::kind_name(scenario.kind) +
        "' does not match subcommand '" + sc::kind_name(expected_kind) + "'");

  sc::Overrides overrides;
  overrides.seed = opt.seed;
  overrides.samples = opt.samples;
  overrides.tol = opt.tol;
  const sc::RunReport report = sc::run(scenario, overrides);
  const std::string text = sc::emit(report, parse_format(opt.format));

  if (opt.out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(opt.out_path);
    if (!out) throw csm::Error("cannot write to '" + opt.out_path + "'");
    out << text;
  }
  return report.all_pass() ? 0 : 1;
}

int list_fixtures() {
  for (const std::string& name : sc::fixture_names()) {
    const sc::Scenario s = sc::parse_scenario(*sc::fixture_text(name));
    std::cout << name << "  (" << sc::kind_name(s.kind) << ")  " << s.title
              << "\n";
  }
  return 0;
}

int dump_fixture(const std::string& name) {
  const auto text = sc::fixture_text(name);
  if (!text) throw csm::Error("no bundled fixture named '" + name + "'");
  std::cout << *text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"measurement-calculus scenario runner"};
  app.set_version_flag("--version", std::string(csm::kVersion));
  app.require_subcommand(1);

  RunOptions chain_opt, epr_opt, spin_opt, gleason_opt;
  add_run_flags(app.add_subcommand("chain", "sequential measurement chains"),
                chain_opt);
  add_run_flags(app.add_subcommand("epr", "entangled-pair correlation suites"),
                epr_opt);
  add_run_flags(app.add_subcommand("spin", "polarization sweeps and spin rotations"),
                spin_opt);
  add_run_flags(app.add_subcommand("gleason", "frame-function additivity and fits"),
                gleason_opt);
  app.add_subcommand("list-fixtures", "list the bundled example scenarios");
  CLI::App* dump = app.add_subcommand("dump", "print a bundled scenario file");
  std::string dump_name;
  dump->add_option("name", dump_name, "fixture name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("chain")) return execute(chain_opt, sc::Kind::Chain);
    if (app.got_subcommand("epr")) return execute(epr_opt, sc::Kind::Epr);
    if (app.got_subcommand("spin")) return execute(spin_opt, sc::Kind::Spin);
    if (app.got_subcommand("gleason"))
      return execute(gleason_opt, sc::Kind::Gleason);
    if (app.got_subcommand("list-fixtures")) return list_fixtures();
    if (app.got_subcommand("dump")) return dump_fixture(dump_name);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
