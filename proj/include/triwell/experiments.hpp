#pragma once

#include "triwell/config.hpp"
#include "triwell/io.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace triwell::cli {

enum Exit : int { kOk = 0, kPrecondition = 2, kNonConvergence = 3, kUsage = 64, kBadConfig = 65 };

struct RunContext {
  std::string out_dir; // run directory; created if missing
  int workers = 1;
  std::uint64_t seed = 0;
  std::string config_path;
};

const std::vector<std::string> &experiment_names();
bool known_experiment(const std::string &name);

struct Outcome {
  int status = kOk;
  io::Json report;
  std::vector<std::pair<std::string, double>> timings; // seconds, manifest only
  std::vector<std::string> files;
};

/// Runs one experiment and writes report.json, manifest.json and artifacts.
/// Errors are mapped onto the exit taxonomy and still leave a manifest behind.
Outcome run_experiment(const std::string &name, const RunConfig &cfg, const RunContext &ctx);

/// Re-derives the [calibration] constants from runs at the calibration radii.
io::Json calibrate(const RunConfig &cfg, int workers = 1);

} // namespace triwell::cli
