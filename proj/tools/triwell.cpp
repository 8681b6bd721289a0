// triwell <experiment> --config <path> [--out <dir>] [--workers N] [--seed S]
#include "triwell/experiments.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

using namespace triwell::cli;

int main(int argc, char **argv) {
  CLI::App app{"triwell: degenerate three-well experiments"};
  std::string experiment, config, out;
  int workers = 1;
  std::uint64_t seed = 0;
  std::string names;
  for (const auto &n : experiment_names()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("experiment", experiment, "one of: " + names)->required();
  app.add_option("--config", config, "configuration file")->required();
  app.add_option("--out", out, "output root (default: $TRIWELL_OUT, else ./runs)");
  app.add_option("--workers", workers, "worker threads for grid evaluation")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed for randomized probes");
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kUsage;
  }
  if (!known_experiment(experiment)) {
    std::cerr << "unknown experiment '" << experiment << "'; expected one of: " << names << "\n";
    return kUsage;
  }
  RunConfig cfg;
  try {
    cfg = RunConfig::load(config);
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kBadConfig;
  }
  if (out.empty()) {
    const char *env = std::getenv("TRIWELL_OUT");
    out = env && *env ? env : "runs";
  }
  RunContext ctx;
  ctx.out_dir = (std::filesystem::path(out) / experiment).string();
  ctx.workers = workers;
  ctx.seed = seed;
  ctx.config_path = config;
  try {
    const Outcome o = run_experiment(experiment, cfg, ctx);
    if (o.report.contains("error")) std::cerr << experiment << ": " << o.report["error"].get<std::string>() << "\n";
    std::cout << experiment << ": status " << o.status << ", report " << ctx.out_dir << "/report.json\n";
    return o.status;
  } catch (const std::exception &e) {
    std::cerr << experiment << ": " << e.what() << "\n";
    return kPrecondition;
  }
}
