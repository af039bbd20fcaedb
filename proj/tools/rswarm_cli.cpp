#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "acceptance.hpp"
#include "rswarm/engine.hpp"
#include "rswarm/io.hpp"
#include "rswarm/suite.hpp"

namespace fs = std::filesystem;
using namespace rswarm;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIntactViolation = 3;

void print_errors(const ValidationError& e) {
  for (const auto& err : e.errors()) {
    std::cerr << (err.path.empty() ? std::string("(document)") : err.path) << ": " << err.message << "\n";
  }
}

std::optional<bool> on_off(const std::string& value) {
  if (value.empty()) return std::nullopt;
  return value == "on";
}

int cmd_run(const std::string& file, const std::string& out, const std::string& resilient, const std::string& detect) {
  Scenario sc;
  try {
    sc = parse_scenario(file);
  } catch (const ValidationError& e) {
    print_errors(e);
    return kExitValidation;
  }
  RunOptions opts;
  opts.resilient = on_off(resilient);
  opts.detect = on_off(detect);
  const auto t0 = std::chrono::steady_clock::now();
  const RunLog log = run(sc, opts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const fs::path dir = out.empty() ? default_output_root() / (sc.name.empty() ? fs::path(file).stem().string() : sc.name)
                                   : fs::path(out);
  write_bundle(dir, sc, log);
  std::cout << "wrote " << dir.string() << " (" << log.steps.size() << " steps, " << fmt9(secs) << " s)\n";
  std::cout << report(dir);
  const bool resilient_on = opts.resilient.value_or(sc.sim.resilient);
  if (resilient_on && !intact_violations(log, sc).empty()) {
    std::cerr << "intact-agent safety violation with resilience on\n";
    return kExitIntactViolation;
  }
  return 0;
}

int cmd_validate(const std::string& file) {
  try {
    const Scenario sc = parse_scenario(file);
    std::cout << file << ": ok (" << sc.agents.size() << " agents, " << sc.obstacles.size() << " obstacles)\n";
    return 0;
  } catch (const ValidationError& e) {
    print_errors(e);
    return kExitValidation;
  }
}

int cmd_generate(const std::string& dir) {
  for (const auto& b : bundled_scenarios()) {
    write_atomic(fs::path(dir) / b.file, serialize_scenario(b.scenario));
    std::cout << (fs::path(dir) / b.file).string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resilient multi-agent safety and formation simulator"};
  app.require_subcommand(1);

  std::string scenario_file, out_dir, resilient, detect, run_dir, gen_dir = "scenarios";
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write its output bundle");
  run_cmd->add_option("scenario", scenario_file, "Scenario JSON file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory");
  run_cmd->add_option("--resilient", resilient, "Resilient control")->check(CLI::IsMember({"on", "off"}));
  run_cmd->add_option("--detect", detect, "Adversary detection")->check(CLI::IsMember({"on", "off"}));

  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file");
  validate_cmd->add_option("scenario", scenario_file, "Scenario JSON file")->required();

  auto* plot_cmd = app.add_subcommand("plot", "Render plot.svg for a run directory");
  plot_cmd->add_option("rundir", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

  auto* report_cmd = app.add_subcommand("report", "Summarize the events of a run directory");
  report_cmd->add_option("rundir", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

  auto* accept_cmd = app.add_subcommand("accept", "Run every acceptance criterion");

  auto* gen_cmd = app.add_subcommand("generate", "Write the bundled scenario files");
  gen_cmd->add_option("dir", gen_dir, "Target directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if ((*run_cmd || *validate_cmd) && !fs::exists(scenario_file)) {
      std::cerr << scenario_file << ": no such file\n";
      return kExitValidation;
    }
    if (*run_cmd) return cmd_run(scenario_file, out_dir, resilient, detect);
    if (*validate_cmd) return cmd_validate(scenario_file);
    if (*plot_cmd) {
      write_atomic(fs::path(run_dir) / "plot.svg", render_plot(run_dir));
      return 0;
    }
    if (*report_cmd) {
      std::cout << report(run_dir);
      return 0;
    }
    if (*accept_cmd) return acceptance::run_all(std::cout) ? 0 : 1;
    if (*gen_cmd) return cmd_generate(gen_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
