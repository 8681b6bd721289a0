// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any selected criterion fails.
//   triwell_acceptance [--only N] [--config default.ini] [--quick quick.ini]
#include "oracles.hpp"

#include <triwell/experiments.hpp>
#include <triwell/heteroclinic.hpp>
#include <triwell/structure1d.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace triwell;
namespace fs = std::filesystem;
using io::Json;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Context {
  cli::RunConfig full, quick;
  fs::path scratch;
};

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

cli::Outcome run(const Context &c, const std::string &name, const cli::RunConfig &cfg, const std::string &tag) {
  cli::RunContext ctx;
  ctx.out_dir = (c.scratch / tag / name).string();
  return cli::run_experiment(name, cfg, ctx);
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- 1. metric equality -----------------------------------------------------

Verdict metric_equality(const Context &c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run(c, "distances", c.full, "c1").report;
  const double t = since(t0);
  const oracle::Triple w{c.full.potential.lambda, c.full.potential.mu};
  const double q12 = oracle::axis_distance(w, -1, 0), q23 = oracle::axis_distance(w, 0, 1);
  const double d12 = r["d12"]["value"], d23 = r["d23"]["value"], d13 = r["d13"]["value"];
  const double s = std::sqrt(2.0) / 4;
  const bool ok = std::abs(d12 + d23 - d13) < 1e-3 && std::abs(d12 - s) < 1e-3 && std::abs(d23 - s) < 1e-3 &&
                  std::abs(d12 - q12) < 1e-3 && std::abs(d23 - q23) < 1e-3 && t < 10;
  return {ok, fmt("d12=%.6f d23=%.6f d13=%.6f defect=%.2e quadrature=%.6f/%.6f %.2fs", d12, d23, d13,
                  d12 + d23 - d13, q12, q23, t)};
}

// --- 2. double-well heteroclinic ---------------------------------------------

Verdict heteroclinic(const Context &) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto pot = builtin_double_well();
  const auto z = hetero::solve_heteroclinic(pot, 1, 2, 20, 4001);
  const double t = since(t0);
  double sup = 0;
  for (std::size_t k = 0; k < z.path.size(); ++k)
    sup = std::max(sup, (z.path[k] - Vec2(std::tanh(z.path.t(k)), 0)).norm());
  const double rate = std::min(z.decay_left, z.decay_right), rate_hi = std::max(z.decay_left, z.decay_right);
  const bool ok = z.converged && sup < 1e-3 && std::abs(z.connection_energy - 4.0 / 3.0) < 1e-4 &&
                  z.residual < 1e-3 && std::abs(rate - 2) < 0.1 && std::abs(rate_hi - 2) < 0.1 && t < 5;
  return {ok, fmt("sup|ζ-tanh|=%.2e E=%.7f (quadrature %.7f) residual=%.2e decay=%.4f/%.4f %.2fs", sup,
                  z.connection_energy, oracle::tanh_energy(20), z.residual, z.decay_left, z.decay_right, t)};
}

// --- 3. spectral gap ---------------------------------------------------------

Verdict spectrum(const Context &c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run(c, "spectrum", c.full, "c3").report;
  const double t = since(t0);
  const auto &s = r["spectra"][0];
  const int below = s["count_below_5e-3"];
  const double overlap = s["overlap"], next = s["next"], mu0 = s["near_zero"];
  // coarse dense eigensolve against the iterative solver on the same profile
  const auto pot = builtin_degenerate_triple(c.full.potential.lambda, c.full.potential.mu);
  const auto z = hetero::solve_heteroclinic(pot, 1, 2, 12, 241);
  const auto sp = hetero::linearized_spectrum(pot, z.path, 3);
  const oracle::Triple w{c.full.potential.lambda, c.full.potential.mu};
  std::vector<Eigen::Matrix2d> H;
  for (const auto &p : z.path.samples) H.push_back(w.hess(p(0), p(1)));
  const auto ev = oracle::dense_spectrum(H, z.path.h());
  double dev = 0;
  for (int k = 0; k < 3; ++k) dev = std::max(dev, std::abs(sp.eigenvalues[std::size_t(k)] - ev(k)));
  const bool ok = below == 1 && overlap > 0.999 && next > 0.1 && dev < 1e-6 && t < 30;
  return {ok, fmt("μ0=%.2e overlap=%.6f next=%.4f count(|μ|<5e-3)=%d dense-oracle dev=%.1e %.2fs", mu0, overlap,
                  next, below, dev, t)};
}

// --- 4. end-well decay -------------------------------------------------------

Verdict endwell(const Context &c) {
  const auto r = run(c, "structure1d", c.full, "c4").report["endwell"];
  const double r2 = r["r2"], slope = r["slope"];
  bool shrinking = true;
  const auto &slack = r["slack"];
  for (std::size_t k = 1; k < slack.size(); ++k)
    shrinking = shrinking && std::abs(slack[k].get<double>()) < std::abs(slack[k - 1].get<double>());
  const bool ok = r["converged"] && shrinking && slope < 0 && r2 > 0.99;
  return {ok, fmt("slack=%.3e, %.3e, %.3e log-slope=%.4f R²=%.10f", slack[0].get<double>(), slack[1].get<double>(),
                  slack[2].get<double>(), slope, r2)};
}

// --- 5. quadratic penalty ----------------------------------------------------

Verdict penalty(const Context &c) {
  const auto r = run(c, "structure1d", c.full, "c5").report["penalty"];
  const double k = r["c"], r2 = r["r2"];
  const auto &d = r["delta"], &e = r["excess"];
  double floor = INFINITY; // largest c with excess >= c·δ² at every δ
  for (std::size_t i = 0; i < d.size(); ++i) floor = std::min(floor, e[i].get<double>() / std::pow(d[i].get<double>(), 2));
  const bool ok = floor > 0 && k > 0 && r2 > 0.95;
  return {ok, fmt("excess=%.5f, %.5f, %.5f fitted c=%.4f R²=%.6f min excess/δ²=%.4f", e[0].get<double>(),
                  e[1].get<double>(), e[2].get<double>(), k, r2, floor)};
}

// --- 6. split recovery at held-out radii -------------------------------------

Verdict split(const Context &c) {
  const auto r = run(c, "structure1d", c.full, "c6").report;
  bool ok = !r["split_checks"].empty();
  std::string detail;
  for (const auto &row : r["split_checks"]) {
    ok = ok && row["within_cell"] && row["h1_ok"] && row["separation_ok"] && row["separation_c"].get<double>() > 0;
    detail += fmt("R=%g: Δa=%.2e Δb=%.2e h1=%.2e/%.2e<=%.2e sep=%g c=%.3f; ", row["R"].get<double>(),
                  row["a_error"].get<double>(), row["b_error"].get<double>(), row["h1_sq_12"].get<double>(),
                  row["h1_sq_23"].get<double>(), row["h1_bound"].get<double>(), row["separation"].get<double>(),
                  row["separation_c"].get<double>());
  }
  return {ok, detail + fmt("(C, c) = (%g, %g)", c.full.calibration.split_C, c.full.calibration.split_c)};
}

// --- 7. competitor gap -------------------------------------------------------

Verdict competitor(const Context &c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run(c, "disk-upper", c.full, "c7").report;
  const double t = since(t0);
  if (r["status"] != 0) return {false, "disk-upper failed: " + r.value("error", std::string())};
  bool ok = r["rows"].size() == 3 && t < 120;
  std::string detail = fmt("R=%g h=%g: ", c.full.disk.R, c.full.disk.h);
  double prev = INFINITY;
  for (const auto &row : r["rows"]) {
    const double gap = row["gap"];
    ok = ok && gap < 0.5 && gap < prev;
    prev = gap;
    detail += fmt("ℓ=%g gap=%.5f; ", row["ell"].get<double>(), gap);
  }
  return {ok, detail + fmt("%.1fs", t)};
}

// --- 8. coarea ---------------------------------------------------------------

Verdict coarea(const Context &c) {
  const auto a = run(c, "disk-lower", c.full, "c8").report;
  const auto b = run(c, "sandwich", c.full, "c8").report;
  if (a["status"] != 0 || b["status"] != 0) return {false, "disk-lower/sandwich did not finish"};
  const auto &sa = a["summary"], &sb = b["slices"];
  const double ia = sa["measured_integral"], ea = sa["energy_2d"], ib = sb["measured_integral"], eb = sb["energy_2d"];
  const bool ok = ia <= 1.02 * ea && ib <= 1.02 * eb;
  return {ok, fmt("competitor: ∫slices=%.4f E=%.4f; minimizer: ∫slices=%.4f E=%.4f", ia, ea, ib, eb)};
}

// --- 9. sandwich -------------------------------------------------------------

Verdict sandwich(const Context &c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run(c, "sandwich", c.full, "c9").report;
  const double t = since(t0);
  if (r["status"] != 0) return {false, "sandwich failed: " + r.value("error", std::string())};
  const int N = 2 * int(std::lround(c.full.disk.R / c.full.minimize.h)) + 1;
  const double margin = r["single_wall_margin"], gap = r["minimizer"]["central_p2_gap"];
  const bool ok = r["lower_ok"] && r["upper_ok"] && r["p2_plateau"] && margin > 0.1 && N >= 800 && t < 900;
  return {ok, fmt("lower=%.4f E=%.4f upper=%.4f single-wall margin=%.3f p2 gap=%.2e blowdown=%s grid=%d² %.0fs",
                  r["lower"].get<double>(), r["measured"].get<double>(), r["upper"].get<double>(), margin, gap,
                  r["blowdown"]["best_template"].get<std::string>().c_str(), N, t)};
}

// --- 10. rescaled slab energies ----------------------------------------------

Verdict gamma_limit(const Context &c) {
  const auto r = run(c, "blowdown", c.full, "c10").report;
  const double d12 = r["d12"], p = r["fit_exponent"];
  bool within = true;
  std::string detail;
  for (const auto &row : r["slab"]) {
    const double R = row["R"], err = row["error"];
    within = within && std::abs(err) < 1 / R;
    detail += fmt("R=%g E_R-d12=%.2e; ", R, err);
  }
  const bool ok = within && std::abs(p + 1) < 0.25;
  return {ok, detail + fmt("d12=%.6f fit exponent=%.3f (R²=%.3f)", d12, p, r["fit_r2"].get<double>())};
}

// --- 11. determinism ---------------------------------------------------------

Verdict determinism(const Context &c) {
  std::string bad;
  int n = 0;
  for (const auto &name : cli::experiment_names()) {
    const auto a = run(c, name, c.quick, "c11a"), b = run(c, name, c.quick, "c11b");
    const auto ja = slurp(c.scratch / "c11a" / name / "report.json"), jb = slurp(c.scratch / "c11b" / name / "report.json");
    if (ja.empty() || ja != jb || a.status != 0) bad += name + " ";
    ++n;
  }
  return {bad.empty(), fmt("%d experiments twice at the quick config", n) + (bad.empty() ? "" : "; differ: " + bad)};
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  std::string config = std::string(TRIWELL_CONFIGS) + "/default.ini";
  std::string quick = std::string(TRIWELL_CONFIGS) + "/quick.ini";
  app.add_option("--only", only, "run one criterion (1-11)")->check(CLI::Range(1, 11));
  app.add_option("--config", config);
  app.add_option("--quick", quick);
  CLI11_PARSE(app, argc, argv);

  Context c;
  c.full = cli::RunConfig::load(config);
  c.quick = cli::RunConfig::load(quick);
  c.scratch = fs::temp_directory_path() / ("triwell_acceptance_" + std::to_string(::getpid()));

  const std::pair<const char *, Verdict (*)(const Context &)> criteria[] = {
      {"degenerate metric equality", metric_equality},
      {"heteroclinic correctness", heteroclinic},
      {"spectral gap", spectrum},
      {"end-well decay", endwell},
      {"quadratic penalty", penalty},
      {"split recovery", split},
      {"competitor upper bound", competitor},
      {"coarea slicing", coarea},
      {"sandwich", sandwich},
      {"rescaled slab limit", gamma_limit},
      {"determinism", determinism},
  };
  int failed = 0;
  for (int k = 1; k <= 11; ++k) {
    if (only && k != only) continue;
    Verdict v;
    try {
      v = criteria[k - 1].second(c);
    } catch (const std::exception &e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("criterion %2d %-28s %s  %s\n", k, criteria[k - 1].first, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(c.scratch);
  return failed ? 1 : 0;
}
