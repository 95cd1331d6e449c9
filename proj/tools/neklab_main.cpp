#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>

#include "neklab/cli/cli.hpp"

namespace {

// NEKLAB_LOG: trace, debug, info, warn (default), error or off.
bool setup_logging() {
  auto logger = spdlog::stderr_logger_st("neklab");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  const char* env = std::getenv("NEKLAB_LOG");
  if (!env || !*env) return true;
  const std::string v(env);
  const auto level = spdlog::level::from_str(v);
  if (level == spdlog::level::off && v != "off") return false;
  spdlog::set_level(level);
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace neklab::cli;
  if (!setup_logging()) {
    std::cerr << "NEKLAB_LOG: unknown level\n";
    return 1;
  }
  CLI::App app{"Experiment runner for near-integrable Hamiltonian stability estimates"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<double> budget;
  const std::map<std::string, std::string> about{
      {"smooth", "Smoothing error against the width s"},
      {"steepness", "Estimate steepness indices or report a violation"},
      {"geography", "Resonance blocks, coverage and disjointness checks"},
      {"normalform", "Resonant normal forms with a posteriori checks"},
      {"stability", "Action drift of benchmark trajectories over an epsilon sweep"},
      {"fit", "Log-log exponent fit of columns from earlier sweeps"}};
  for (const auto& name : subcommands()) {
    auto* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--config", config, "YAML experiment configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--threads", threads, "Worker threads");
    sub->add_option("--budget-secs", budget, "Wall-clock budget in seconds");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const std::string subcommand = app.get_subcommands().front()->get_name();

  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  try {
    cfg = config.empty() ? parse_config("schema_version: 1\n", subcommand) : load_config(config, subcommand);
  } catch (const ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return 1;
  }
  if (!out.empty()) cfg.output = out;
  if (seed) cfg.seed = *seed;
  if (threads) cfg.threads = *threads;
  if (budget) cfg.budget_secs = *budget;

  const RunResult res = execute(cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    write_artifacts(cfg, res, wall);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 3;
  }
  if (res.exit_code == 1) std::cerr << "invalid configuration: " << res.message << '\n';
  else if (res.exit_code == 2) std::cerr << "budget exceeded: " << res.message << '\n';
  else if (res.exit_code == 3) std::cerr << "invariant violation (see witness.json): " << res.message << '\n';
  else spdlog::info("{}: wrote {} files to {}", subcommand, res.files.size() + 1, cfg.output);
  return res.exit_code;
}
