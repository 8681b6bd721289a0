#pragma once

#include "triwell/types.hpp"

#include <istream>
#include <map>
#include <string>
#include <vector>

namespace triwell::cli {

/// Malformed configuration; line is 1-based, 0 when not tied to a line.
class ConfigError : public Error {
public:
  ConfigError(const std::string &file, int line, const std::string &msg)
      : Error(file + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + msg), line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

struct ConfigFile {
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::string name;
  std::map<std::string, std::map<std::string, Entry>> sections;
  std::map<std::string, int> section_lines; // first header line

  static ConfigFile parse(std::istream &in, const std::string &name = "<config>");
  static ConfigFile load(const std::string &path);
};

struct RunConfig {
  struct {
    std::string family = "degenerate_triple";
    double lambda = 2, mu = 1, c = 1, l1 = 1, l2 = 4, angle = 0;
  } potential;
  struct {
    int n = 129, n_coarse = 17, multistart = 5, max_iters = 200;
    double tol_grad = 1e-6;
    double eta = 0; // 0 → a fifth of the smallest convexity radius
  } metric;
  struct {
    double L = 20;
    int n = 801;
    double tol = 1e-8;
    int max_iters = 400;
    int spectrum_k = 3;
    double spectrum_tol = 1e-8;
  } heteroclinic;
  struct {
    double R = 30, h = 0.05, shift = 15, ell = 8;
    std::vector<double> endwell_R{5, 10, 20};
    double endwell_h = 0.05, endwell_ref = 40;
    double endwell_x = 0.1, endwell_y = 0.02;
    double penalty_R = 10, penalty_h = 0.05;
    std::vector<double> deltas{0.05, 0.1, 0.2};
    std::vector<double> calib_R{20, 25};
    std::vector<double> check_R{30, 40};
  } structure1d;
  struct {
    double R = 40, h = 0.05, trace_h = 0.05;
    double eps = 0.15;     // planted wall tilt
    double trace_ell = 5;  // truncation of the planted walls
    double ell = 0;        // 0 → from the recovered angles
    std::vector<double> ells{3, 4, 5};
    double rho = 1, sigma = 0; // σ = 0 → √R
    double C_pre = 1, eps_max = 0.2, gamma = 0.1;
    std::vector<double> calib_R{20, 30};
  } disk;
  struct {
    double h = 0.1, tol_opt = 1e-6;
    int max_iters = 20000, levels = 4, memory = 8;
    double init_kappa = 2, band = 1;
  } minimize;
  struct {
    int n_slices = 400;
    double R0 = 0; // 0 → R/2
    int lipschitz_pairs = 10000;
  } slicing;
  struct {
    double R_scale = 0; // 0 → disk R
    int samples = 200;
    std::vector<double> slab_R{10, 20, 40};
    double slab_h = 0.05;
  } blowdown;
  struct {
    double upper_C = 1, upper_c = 1.414;
    double slice_c = 1.414;
    double final_c = 0, final_C = 1, tail_C = 1, tail_c = 1.414;
    double split_C = 1, split_c = 2.828;
  } calibration;
  struct {
    bool csv = true, binary = true;
  } output;

  static RunConfig from(const ConfigFile &file);
  static RunConfig load(const std::string &path) { return from(ConfigFile::load(path)); }
  /// Every resolved key, one `section.key = value` per line, sorted.
  std::string snapshot() const;
};

} // namespace triwell::cli
