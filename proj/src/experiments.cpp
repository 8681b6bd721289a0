#include "triwell/experiments.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>
#include <random>
#include <sstream>

namespace triwell::cli {

namespace {

using io::Json;
namespace fs = std::filesystem;
using disk::Field2D;

const std::vector<std::string> kNames = {"validate",  "distances",   "heteroclinic", "spectrum",
                                         "structure1d", "disk-upper", "disk-lower",  "disk-minimize",
                                         "sandwich",  "blowdown"};

metric::DistanceOptions distance_options(const RunConfig &c) {
  metric::DistanceOptions o;
  o.n = std::size_t(c.metric.n);
  o.n_coarse = std::size_t(c.metric.n_coarse);
  o.multistart = c.metric.multistart;
  o.max_iters = c.metric.max_iters;
  o.tol_grad = c.metric.tol_grad;
  return o;
}

hetero::SolveOptions solve_options(const RunConfig &c) {
  hetero::SolveOptions o;
  o.chain.max_iters = c.heteroclinic.max_iters;
  o.chain.tol = c.heteroclinic.tol;
  return o;
}

Json profile_json(const hetero::HeteroclinicProfile &z) {
  return Json{{"pair", {z.i, z.j}},
              {"energy", z.connection_energy},
              {"midpoint_shift", z.midpoint_shift},
              {"decay_left", z.decay_left},
              {"decay_right", z.decay_right},
              {"residual_sup", z.residual},
              {"residual_l2", z.residual_l2},
              {"converged", z.converged},
              {"no_direct_connection", z.no_direct_connection},
              {"min_gap_other", z.min_gap_other},
              {"window", {z.path.t_start, z.path.t_end}},
              {"samples", z.path.size()}};
}

Json angles_json(const disk::AngleSet &A) {
  return Json{{"R", A.R},       {"alpha21", A.a21}, {"alpha32", A.a32}, {"alpha_bar", A.abar},
              {"beta12", A.b12}, {"beta23", A.b23}, {"beta_bar", A.bbar}, {"L1", A.L1()},
              {"L3", A.L3()},    {"ell", A.ell()},  {"eps", A.eps()}};
}

Json split_json(const structure::SplitPoints &s) {
  return Json{{"a", s.a},
              {"T", s.T},
              {"b", s.b},
              {"a_median", s.a_median},
              {"b_median", s.b_median},
              {"h1_sq_12", s.h1_sq_12},
              {"h1_sq_23", s.h1_sq_23},
              {"h1_sq_12_recentered", s.h1_sq_12_recentered},
              {"h1_sq_23_recentered", s.h1_sq_23_recentered},
              {"p2_gap", s.p2_gap},
              {"gamma", s.gamma},
              {"separation", s.separation},
              {"separation_c", s.separation_c},
              {"sequence", s.decomposition.sequence_string()}};
}

Json energy_json(const disk::EnergyReport &e) {
  return Json{{"total", e.total}, {"gradient_part", e.gradient_part}, {"potential_part", e.potential_part}};
}

bool monotone(const std::vector<std::vector<double>> &hist) {
  for (const auto &h : hist)
    for (std::size_t k = 1; k < h.size(); ++k)
      if (h[k] > h[k - 1]) return false;
  return true;
}

// Shared lazily-built objects of one run.
class Env {
public:
  Env(const RunConfig &c, int workers, Outcome *out = nullptr, std::string dir = {})
      : cfg(c), workers(workers), out_(out), dir_(std::move(dir)) {}

  const RunConfig &cfg;
  int workers;

  template <class F> auto timed(const std::string &name, F &&f) {
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&] {
      if (out_)
        out_->timings.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    };
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      finish();
    } else {
      auto r = f();
      finish();
      return r;
    }
  }

  std::string file(const std::string &name) {
    if (out_) out_->files.push_back(name);
    return (fs::path(dir_) / name).string();
  }

  const Potential &pot() {
    if (!pot_) {
      const auto &p = cfg.potential;
      pot_ = make_builtin(p.family, {{"lambda", p.lambda}, {"mu", p.mu}, {"c", p.c}, {"l1", p.l1},
                                     {"l2", p.l2}, {"angle", p.angle}});
    }
    return *pot_;
  }

  void require_three_wells() {
    if (pot().well_count() != 3) throw PreconditionError("this experiment needs a three-well potential");
  }

  double eta() {
    if (!eta_) eta_ = cfg.metric.eta > 0 ? cfg.metric.eta : timed("eta", [&] { return metric::default_eta(pot()); });
    return *eta_;
  }

  const metric::DistanceOracle &oracle() {
    if (!oracle_) oracle_ = timed("oracle", [&] { return metric::DistanceOracle(pot(), eta()); });
    return *oracle_;
  }

  const hetero::HeteroclinicProfile &profile(int i, int j) {
    auto &slot = i == 1 && j == 2 ? z12_ : j == 3 && i == 2 ? z23_ : z13_;
    if (!slot) {
      const double L = (i == 1 && j == 3 ? 2 : 1) * cfg.heteroclinic.L;
      const std::size_t n = std::size_t((i == 1 && j == 3 ? 2 : 1) * (cfg.heteroclinic.n - 1) + 1);
      slot = timed("profile" + std::to_string(i) + std::to_string(j),
                   [&] { return hetero::solve_heteroclinic(pot(), i, j, L, n, solve_options(cfg)); });
    }
    return *slot;
  }
  const hetero::HeteroclinicProfile &z12() { return profile(1, 2); }
  const hetero::HeteroclinicProfile &z23() { return profile(2, 3); }

  double d12() { return z12().connection_energy; }
  double d23() { return z23().connection_energy; }
  double min_rate() {
    return std::min({z12().decay_left, z12().decay_right, z23().decay_left, z23().decay_right});
  }

  double sigma(double R) const { return cfg.disk.sigma > 0 ? cfg.disk.sigma : std::sqrt(R); }

  disk::BoundaryTrace trace(double R) {
    require_three_wells();
    const double e = cfg.disk.eps;
    const std::size_t M = std::size_t(std::lround(2 * M_PI * R / cfg.disk.trace_h));
    return disk::synthetic_trace(z12(), z23(), R, M_PI / 2 + e, M_PI / 2 - e, -M_PI / 2 - e,
                                 -M_PI / 2 + e, cfg.disk.trace_ell, M);
  }

  disk::AngleReport angles(const disk::BoundaryTrace &tr) {
    return timed("boundary_angles", [&] {
      return disk::boundary_angles(pot(), tr, oracle(), cfg.disk.gamma, z12(), z23(), tr.spacing());
    });
  }

  double gamma_of(const disk::AngleReport &ar) {
    return std::max(0.0, ar.boundary_energy - 2 * (d12() + d23()));
  }

  disk::CompetitorParams competitor_params(double R, double ell) const {
    disk::CompetitorParams p;
    p.ell = ell;
    p.rho = cfg.disk.rho;
    p.sigma = sigma(R);
    p.C = cfg.disk.C_pre;
    p.eps_max = cfg.disk.eps_max;
    return p;
  }

  disk::BoundConstants upper_constants() const { return {cfg.calibration.upper_C, cfg.calibration.upper_c}; }

  disk::SliceConstants slice_constants() const {
    const auto &k = cfg.calibration;
    return {k.slice_c, k.final_c, k.final_C, k.tail_C, k.tail_c};
  }

  double upper(const disk::AngleReport &ar, double ell) {
    const double R = ar.angles.R;
    return disk::upper_bound_formula(ar.angles, ell, cfg.disk.rho, sigma(R), eta(), gamma_of(ar),
                                     upper_constants(), d12(), d23());
  }

  disk::MinimizeOptions minimize_options() const {
    disk::MinimizeOptions o;
    o.max_iters = cfg.minimize.max_iters;
    o.tol_opt = cfg.minimize.tol_opt;
    o.levels = cfg.minimize.levels;
    o.memory = cfg.minimize.memory;
    o.workers = workers;
    return o;
  }

  std::function<Vec2(double, double)> wall_template() {
    const Vec2 p1 = pot().well(1).position, p3 = pot().well(3).position;
    const double k = cfg.minimize.init_kappa;
    return [p1, p3, k](double x, double) {
      const double s = 0.5 * (1 + std::tanh(k * x));
      return Vec2((1 - s) * p1 + s * p3);
    };
  }

  void write_grid(const std::string &stem, const Field2D &f) {
    if (cfg.output.csv) io::write_grid_csv(file(stem + ".csv"), f);
    if (cfg.output.binary) io::write_grid_binary(file(stem + ".bin"), f);
  }

private:
  Outcome *out_;
  std::string dir_;
  std::optional<Potential> pot_;
  std::optional<double> eta_;
  std::optional<metric::DistanceOracle> oracle_;
  std::optional<hetero::HeteroclinicProfile> z12_, z23_, z13_;
};

double central_p2_gap(const Potential &pot, const Field2D &f) {
  const Vec2 p2 = pot.well(2).position;
  double m = INFINITY;
  for (int j = 0; j < f.N; ++j) {
    const double y = f.y(j);
    if (std::abs(y) > f.R - 1) continue;
    m = std::min(m, (f.sample(Vec2(0, y)) - p2).norm());
  }
  return m;
}

// Glued truncated profiles with walls at ∓s on [-R, R].
Path1D glued(Env &env, double R, double h, double s, double ell) {
  const std::size_t n = std::size_t(std::lround(2 * R / h)) + 1;
  std::vector<Vec2> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = -R + 2 * R * double(k) / double(n - 1);
    x[k] = t < 0 ? env.z12().truncated(t + s, ell) : env.z23().truncated(t - s, ell);
  }
  return Path1D(-R, R, x);
}

Json split_row(Env &env, double R, double C, double c) {
  const auto &k = env.cfg.structure1d;
  const double s = R / 2;
  const Path1D f = glued(env, R, k.h, s, k.ell);
  const auto sp = structure::locate_split(env.pot(), f, env.oracle(), env.z12(), env.z23());
  const double bound = C * (sp.gamma + std::exp(-c * R));
  const double h1 = std::max(sp.h1_sq_12, sp.h1_sq_23);
  Json j = split_json(sp);
  j["R"] = R;
  j["shift"] = s;
  j["a_error"] = std::abs(sp.a + s);
  j["b_error"] = std::abs(sp.b - s);
  j["within_cell"] = std::abs(sp.a + s) <= f.h() * (1 + 1e-9) && std::abs(sp.b - s) <= f.h() * (1 + 1e-9);
  j["h1_bound"] = bound;
  j["h1_ok"] = h1 < bound;
  j["separation_ok"] = sp.separation_c > 0;
  return j;
}

// ---------------------------------------------------------------------------

int exp_validate(Env &env, Json &r) {
  const auto rep = env.timed("validate", [&] { return validate_potential(env.pot()); });
  Json eig = Json::array();
  for (const auto &e : rep.eigenvalues) eig.push_back(io::vec(e));
  r["family"] = env.pot().family();
  r["flags"] = {{"posdef", rep.posdef},       {"nonnegative", rep.nonnegative},
                {"winfin", rep.winfin},       {"zero_set", rep.zero_set},
                {"degenerate", rep.degenerate}, {"p2generic", rep.p2generic},
                {"geodesic_through_p2", rep.geodesic_through_p2},
                {"inconclusive", rep.inconclusive}};
  r["eigenvalues"] = eig;
  r["d12"] = rep.d12;
  r["d23"] = rep.d23;
  r["d13"] = rep.d13;
  r["defect"] = rep.defect;
  r["p2_path_gap"] = rep.p2_path_gap;
  r["min_radial_derivative"] = rep.min_radial_derivative;
  r["min_sampled_W"] = rep.min_sampled_W;
  r["notes"] = rep.notes;
  r["all_pass"] = rep.all_pass();
  return rep.all_pass() ? kOk : kPrecondition;
}

int exp_distances(Env &env, Json &r) {
  env.require_three_wells();
  const auto wd = env.timed("distances", [&] { return metric::well_distances(env.pot(), distance_options(env.cfg)); });
  auto one = [&](const metric::DistanceResult &d, const std::string &name) {
    io::write_path_csv(env.file("geodesic" + name + ".csv"), d.path);
    return Json{{"value", d.value},           {"converged", d.converged}, {"residual", d.residual},
                {"iterations", d.iterations}, {"start_index", d.start_index},
                {"start_values", d.start_values}};
  };
  r["d12"] = one(wd.r12, "12");
  r["d23"] = one(wd.r23, "23");
  r["d13"] = one(wd.r13, "13");
  r["defect"] = wd.d12 + wd.d23 - wd.d13;
  Json wells = Json::array();
  for (int l = 1; l <= 3; ++l) {
    const Well &w = env.pot().well(l);
    wells.push_back({{"label", w.label},
                     {"position", io::vec(w.position)},
                     {"eigenvalues", io::vec(w.eigenvalues)},
                     {"convexity_radius", metric::convexity_radius(env.pot(), w)},
                     {"convexity_radius_metric", metric::convexity_radius_metric(env.pot(), w)}});
  }
  r["wells"] = wells;
  r["eta"] = env.eta();
  const bool ok = wd.r12.converged && wd.r23.converged && wd.r13.converged;
  return ok ? kOk : kNonConvergence;
}

int exp_heteroclinic(Env &env, Json &r) {
  const bool three = env.pot().well_count() == 3;
  std::vector<std::pair<int, int>> pairs = {{1, 2}};
  if (three) pairs = {{1, 2}, {2, 3}, {1, 3}};
  Json profiles = Json::array();
  bool ok = true;
  for (auto [i, j] : pairs) {
    const auto &z = env.profile(i, j);
    io::write_path_csv(env.file("profile" + std::to_string(i) + std::to_string(j) + ".csv"), z.path);
    profiles.push_back(profile_json(z));
    if (!z.converged && !z.no_direct_connection) ok = false;
  }
  r["profiles"] = profiles;
  const auto tf = env.timed("truncation", [&] { return hetero::fit_truncation(env.pot(), env.z12(), {2, 3, 4, 5, 6}); });
  r["truncation12"] = {{"A_energy", tf.A_energy}, {"a_energy", tf.a_energy}, {"r2_energy", tf.r2_energy},
                       {"A_l2", tf.A_l2},         {"a_l2", tf.a_l2},         {"r2_l2", tf.r2_l2}};
  return ok ? kOk : kNonConvergence;
}

int exp_spectrum(Env &env, Json &r) {
  const bool three = env.pot().well_count() == 3;
  hetero::SpectrumOptions so;
  so.tol = env.cfg.heteroclinic.spectrum_tol;
  Json rows = Json::array();
  std::vector<std::pair<int, int>> pairs = {{1, 2}};
  if (three) pairs.push_back({2, 3});
  for (auto [i, j] : pairs) {
    const auto &z = env.profile(i, j);
    const auto sp = env.timed("spectrum" + std::to_string(i) + std::to_string(j), [&] {
      return hetero::linearized_spectrum(env.pot(), z.path, env.cfg.heteroclinic.spectrum_k, so);
    });
    rows.push_back({{"pair", {i, j}},
                    {"eigenvalues", sp.eigenvalues},
                    {"residuals", sp.residuals},
                    {"near_zero", sp.near_zero},
                    {"overlap", sp.overlap},
                    {"next", sp.next},
                    {"gap", sp.gap},
                    {"count_below_5e-3", sp.count_below(5e-3)},
                    {"iterations", sp.iterations}});
  }
  r["spectra"] = rows;
  if (three) {
    const auto al = hetero::p2_alignment(env.pot(), env.z12(), env.z23().reversed());
    r["p2_alignment"] = {{"angle12", al.angle12}, {"angle32", al.angle32}, {"generic", al.generic}};
  }
  return kOk;
}

int exp_structure1d(Env &env, Json &r) {
  env.require_three_wells();
  const auto &k = env.cfg.structure1d;
  const auto &cal = env.cfg.calibration;
  r["split"] = env.timed("split", [&] { return split_row(env, k.R, cal.split_C, cal.split_c); });
  Json checks = Json::array();
  for (double R : k.check_R) checks.push_back(split_row(env, R, cal.split_C, cal.split_c));
  r["split_checks"] = checks;

  const Vec2 start = env.pot().well(2).position + Vec2(k.endwell_x, k.endwell_y);
  const auto st = env.timed("endwell", [&] {
    return structure::endwell_decay_study(env.pot(), 2, start, k.endwell_R, k.endwell_h, k.endwell_ref);
  });
  r["endwell"] = {{"R", st.R},
                  {"energy", st.energy},
                  {"slack", st.slack},
                  {"reference", st.reference},
                  {"slope", st.fit.slope},
                  {"r2", st.fit.r2},
                  {"converged", st.converged}};

  const auto ps = env.timed("penalty", [&] {
    return structure::interior_penalty_study(env.pot(), env.eta(), k.penalty_R, k.penalty_h, k.deltas);
  });
  r["penalty"] = {{"eta", env.eta()},
                  {"delta", ps.delta},
                  {"excess", ps.excess},
                  {"min_sq", ps.min_sq},
                  {"excess_through", ps.excess_through},
                  {"c", ps.c},
                  {"r2", ps.r2},
                  {"c_minsq", ps.c_minsq}};

  const auto &z = env.z12();
  std::vector<Vec2> y(z.path.size());
  for (std::size_t q = 0; q < y.size(); ++q) y[q] = z.eval(z.path.t(q) - 1.0);
  const auto sg = structure::schatzman_gap(env.pot(), Path1D(z.path.t_start, z.path.t_end, y), z);
  r["schatzman"] = {{"best_shift", sg.best_shift},
                    {"h1_sq_distance", sg.h1_sq_distance},
                    {"energy_excess", sg.energy_excess},
                    {"ratio", sg.ratio}};
  return st.converged ? kOk : kNonConvergence;
}

Json upper_rows(Env &env, const disk::BoundaryTrace &tr, const disk::AngleReport &ar,
                const std::vector<double> &ells, double h, std::optional<Field2D> *keep) {
  const double R = tr.R, base = env.d12() * ar.angles.L1() + env.d23() * ar.angles.L3();
  Json rows = Json::array();
  for (double ell : ells) {
    Field2D f = env.timed("competitor", [&] {
      return disk::build_competitor(env.pot(), tr, ar.angles, env.z12(), env.z23(), h, env.competitor_params(R, ell));
    });
    const auto E = disk::energy_2d(env.pot(), f, {}, env.workers);
    const auto ann = disk::energy_2d(env.pot(), f, [&](double x, double y) { return x * x + y * y > (R - 1) * (R - 1); },
                                     env.workers);
    rows.push_back({{"ell", ell},
                    {"energy", energy_json(E)},
                    {"base", base},
                    {"gap", E.total - base},
                    {"annulus_energy", ann.total},
                    {"upper_bound", env.upper(ar, ell)}});
    if (keep && !*keep) *keep = std::move(f);
  }
  return rows;
}

int exp_disk_upper(Env &env, Json &r) {
  const auto &c = env.cfg.disk;
  const auto tr = env.trace(c.R);
  const auto ar = env.angles(tr);
  r["angles"] = angles_json(ar.angles);
  r["planted_error"] = std::max({std::abs(ar.angles.a21 - (M_PI / 2 + c.eps)), std::abs(ar.angles.a32 - (M_PI / 2 - c.eps)),
                                 std::abs(ar.angles.b12 - (-M_PI / 2 - c.eps)), std::abs(ar.angles.b23 - (-M_PI / 2 + c.eps))});
  r["boundary_energy"] = ar.boundary_energy;
  r["gamma"] = env.gamma_of(ar);
  r["max_dist_p1"] = ar.max_dist_p1;
  r["max_dist_p3"] = ar.max_dist_p3;
  r["rho"] = c.rho;
  r["sigma"] = env.sigma(c.R);
  std::vector<double> ells = c.ell > 0 ? std::vector<double>{c.ell} : c.ells;
  std::optional<Field2D> first;
  const Json rows = upper_rows(env, tr, ar, ells, c.h, &first);
  bool mono = true;
  for (std::size_t k = 1; k < rows.size(); ++k)
    mono = mono && (rows[k]["ell"].get<double>() > rows[k - 1]["ell"].get<double>()) &&
           (rows[k]["gap"].get<double>() < rows[k - 1]["gap"].get<double>());
  r["rows"] = rows;
  r["gap_monotone"] = mono;
  if (first) env.write_grid("competitor", *first);
  return kOk;
}

Json slice_summary(const disk::SliceBound &sb, double energy) {
  int consistent = 0;
  for (const auto &row : sb.rows) consistent += row.energy >= row.bound - 0.02;
  return Json{{"total_bound", sb.total_bound},
              {"measured_integral", sb.measured_integral},
              {"energy_2d", energy},
              {"coarea_ok", sb.measured_integral <= 1.02 * energy},
              {"consistent_fraction", double(consistent) / double(sb.rows.size())},
              {"measure_T", sb.covered_T}};
}

Json slice_table(const disk::SliceBound &sb) {
  Json rows = Json::array();
  for (const auto &row : sb.rows)
    rows.push_back({{"t", row.t},
                    {"case", std::string(1, row.slice_case)},
                    {"delta", row.delta},
                    {"energy", row.energy},
                    {"bound", row.bound},
                    {"in_T", row.in_T}});
  return rows;
}

int exp_disk_lower(Env &env, Json &r, std::uint64_t seed) {
  const auto &c = env.cfg.disk;
  const auto tr = env.trace(c.R);
  const auto ar = env.angles(tr);
  const double ell = c.ell > 0 ? c.ell : ar.angles.ell();
  const Field2D f = env.timed("competitor", [&] {
    return disk::build_competitor(env.pot(), tr, ar.angles, env.z12(), env.z23(), c.h, env.competitor_params(c.R, ell));
  });
  const auto E = disk::energy_2d(env.pot(), f, {}, env.workers);
  const auto z = disk::slice_function(ar.angles);
  const double R0 = env.cfg.slicing.R0 > 0 ? env.cfg.slicing.R0 : c.R / 2;
  const auto sb = env.timed("slices", [&] {
    return disk::slice_lower_bound(env.pot(), f, z, env.oracle(), ar.angles, R0, env.cfg.slicing.n_slices,
                                   env.d12(), env.d23(), env.slice_constants());
  });
  r["angles"] = angles_json(ar.angles);
  r["ell"] = ell;
  r["slice_function"] = {{"u1", io::vec(z.u1)}, {"u3", io::vec(z.u3)}, {"lambda1", z.l1}, {"lambda3", z.l3},
                         {"single", z.single}};
  r["anchor_defects"] = {std::abs(z(z.a1) - z(z.b1) - (z.a1 - z.b1).norm()),
                         std::abs(z(z.a3) - z(z.b3) - (z.a3 - z.b3).norm())};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-c.R, c.R);
  double lip = 0;
  for (int k = 0; k < env.cfg.slicing.lipschitz_pairs; ++k) {
    const Vec2 a(U(rng), U(rng)), b(U(rng), U(rng));
    const double d = (a - b).norm();
    if (d > 0) lip = std::max(lip, std::abs(z(a) - z(b)) / d);
  }
  r["lipschitz_max_ratio"] = lip;
  r["R0"] = R0;
  r["summary"] = slice_summary(sb, E.total);
  io::write_json(env.file("slices.json"), slice_table(sb));
  return kOk;
}

struct Minimized {
  disk::MinimizeResult res;
  double p2_gap = 0;
};

Minimized minimize(Env &env, const disk::BoundaryTrace &tr, const char *label,
                   const std::function<bool(double, double)> &pin = {}) {
  Minimized m;
  m.res = env.timed(label, [&] {
    return disk::minimize_field(env.pot(), tr, tr.R, env.cfg.minimize.h, env.wall_template(), env.minimize_options(), pin);
  });
  m.p2_gap = central_p2_gap(env.pot(), m.res.field);
  return m;
}

Json minimize_json(const Minimized &m) {
  Json levels = Json::array();
  for (const auto &h : m.res.history) levels.push_back({{"iterations", h.size() - 1}, {"final_energy", h.back()}});
  return Json{{"converged", m.res.converged},
              {"iterations", m.res.iterations},
              {"residual", m.res.residual},
              {"energy", energy_json(m.res.energy)},
              {"levels", levels},
              {"monotone", monotone(m.res.history)},
              {"central_p2_gap", m.p2_gap},
              {"p2_plateau", m.p2_gap < 0.05}};
}

int exp_disk_minimize(Env &env, Json &r) {
  const auto tr = env.trace(env.cfg.disk.R);
  const auto m = minimize(env, tr, "minimize");
  r["R"] = tr.R;
  r["h"] = m.res.field.h;
  r["minimizer"] = minimize_json(m);
  env.write_grid("minimizer", m.res.field);
  return m.res.converged ? kOk : kNonConvergence;
}

Json blowdown_json(const disk::BlowdownResult &b) {
  return Json{{"best_template", disk::template_name(b.best_template)},
              {"best_rotation_deg", b.best_rotation_deg},
              {"l1_distance", b.l1_distance},
              {"per_template", b.per_template}};
}

int exp_sandwich(Env &env, Json &r) {
  const auto &c = env.cfg.disk;
  const auto tr = env.trace(c.R);
  const auto ar = env.angles(tr);
  const double ell = c.ell > 0 ? c.ell : ar.angles.ell();
  const auto m = minimize(env, tr, "minimize");
  const double band = env.cfg.minimize.band, R = c.R;
  const auto single = minimize(env, tr, "single_wall", [band, R](double x, double y) {
    return std::abs(x) <= band && std::abs(y) <= R / 2;
  });
  const double E = m.res.energy.total;
  const double upper = env.upper(ar, ell);
  const auto z = disk::slice_function(ar.angles);
  const double R0 = env.cfg.slicing.R0 > 0 ? env.cfg.slicing.R0 : R / 2;
  const auto sb = env.timed("slices", [&] {
    return disk::slice_lower_bound(env.pot(), m.res.field, z, env.oracle(), ar.angles, R0,
                                   env.cfg.slicing.n_slices, env.d12(), env.d23(), env.slice_constants());
  });
  const double R_scale = env.cfg.blowdown.R_scale > 0 ? env.cfg.blowdown.R_scale : R;
  const auto bd = env.timed("blowdown", [&] {
    return disk::blowdown_distance(env.pot(), m.res.field, R_scale, env.cfg.blowdown.samples);
  });
  r["angles"] = angles_json(ar.angles);
  r["ell"] = ell;
  r["base"] = env.d12() * ar.angles.L1() + env.d23() * ar.angles.L3();
  r["lower"] = sb.total_bound;
  r["measured"] = E;
  r["upper"] = upper;
  r["lower_ok"] = sb.total_bound <= E * 1.02;
  r["upper_ok"] = E <= upper + 0.02 * E;
  r["slices"] = slice_summary(sb, E);
  r["minimizer"] = minimize_json(m);
  r["single_wall"] = minimize_json(single);
  r["single_wall_margin"] = single.res.energy.total - E;
  r["two_walls_win"] = single.res.energy.total - E > 0.1;
  r["p2_plateau"] = m.p2_gap < 0.05;
  r["blowdown"] = blowdown_json(bd);
  r["sandwich_holds"] = r["lower_ok"].get<bool>() && r["upper_ok"].get<bool>();
  io::write_json(env.file("slices.json"), slice_table(sb));
  env.write_grid("minimizer", m.res.field);
  return m.res.converged && single.res.converged ? kOk : kNonConvergence;
}

int exp_blowdown(Env &env, Json &r) {
  const auto &b = env.cfg.blowdown;
  const auto &z = env.z12();
  const double d12 = env.pot().well_count() == 3 ? env.d12() : z.connection_energy;
  Json rows = Json::array();
  std::vector<double> lr, le;
  for (double R : b.slab_R) {
    const auto tr = disk::BoundaryTrace::from_function(R, std::size_t(std::lround(2 * M_PI * R / b.slab_h)),
                                                       [&](double th) { return z.eval(R * std::cos(th)); });
    Field2D f = Field2D::make(R, b.slab_h, tr);
    f.fill([&](double x, double) { return z.eval(x); });
    const disk::Rect unit{-0.5, 0.5, -0.5, 0.5};
    const double ER = disk::rescaled_energy(env.pot(), f, R, unit);
    const double Ephys = disk::energy_on_rect(env.pot(), f, {-R / 2, R / 2, -R / 2, R / 2});
    const auto bd = disk::blowdown_distance(env.pot(), f, R, b.samples);
    rows.push_back({{"R", R},
                    {"E_R", ER},
                    {"error", ER - d12},
                    {"identity_defect", std::abs(Ephys - R * ER) / std::max(1e-300, std::abs(Ephys))},
                    {"blowdown", blowdown_json(bd)}});
    lr.push_back(std::log(R));
    le.push_back(std::log(std::max(1e-300, std::abs(ER - d12))));
  }
  r["d12"] = d12;
  r["slab"] = rows;
  if (lr.size() >= 2) {
    const auto fit = linear_fit(lr, le);
    r["fit_exponent"] = fit.slope;
    r["fit_r2"] = fit.r2;
  }
  const double sharp = disk::sharp_energy({{1, 2, Vec2(0, -1), Vec2(0, 1)}}, {disk::Region::Disk, {}, 1.0},
                                          d12, env.pot().well_count() == 3 ? env.d23() : d12, 2 * d12);
  r["sharp_H12_unit_disk"] = sharp;
  return kOk;
}

} // namespace

const std::vector<std::string> &experiment_names() { return kNames; }

bool known_experiment(const std::string &name) {
  return std::find(kNames.begin(), kNames.end(), name) != kNames.end();
}

Outcome run_experiment(const std::string &name, const RunConfig &cfg, const RunContext &ctx) {
  if (!known_experiment(name)) throw Error("unknown experiment '" + name + "'");
  Outcome out;
  fs::create_directories(ctx.out_dir);
  Env env(cfg, std::max(1, ctx.workers), &out, ctx.out_dir);
  Json &r = out.report;
  r["experiment"] = name;
  const auto t0 = std::chrono::steady_clock::now();
  std::string error;
  try {
    if (name == "validate") out.status = exp_validate(env, r);
    else if (name == "distances") out.status = exp_distances(env, r);
    else if (name == "heteroclinic") out.status = exp_heteroclinic(env, r);
    else if (name == "spectrum") out.status = exp_spectrum(env, r);
    else if (name == "structure1d") out.status = exp_structure1d(env, r);
    else if (name == "disk-upper") out.status = exp_disk_upper(env, r);
    else if (name == "disk-lower") out.status = exp_disk_lower(env, r, ctx.seed);
    else if (name == "disk-minimize") out.status = exp_disk_minimize(env, r);
    else if (name == "sandwich") out.status = exp_sandwich(env, r);
    else out.status = exp_blowdown(env, r);
  } catch (const ConfigurationError &e) {
    out.status = kBadConfig;
    error = e.what();
  } catch (const ConvergenceError &e) {
    out.status = kNonConvergence;
    error = e.what();
  } catch (const Error &e) {
    out.status = kPrecondition;
    error = e.what();
  }
  r["status"] = out.status;
  if (!error.empty()) r["error"] = error;
  out.timings.emplace_back("total", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

  io::write_json((fs::path(ctx.out_dir) / "report.json").string(), r);
  Json timings = Json::object();
  for (const auto &[k, v] : out.timings) timings[k] = v;
  Json snapshot = Json::array();
  {
    std::istringstream ss(cfg.snapshot());
    for (std::string line; std::getline(ss, line);) snapshot.push_back(line);
  }
  const Json manifest{{"tool", "triwell"},
                      {"version", TRIWELL_VERSION},
                      {"experiment", name},
                      {"status", out.status},
                      {"config_path", ctx.config_path},
                      {"config", snapshot},
                      {"workers", std::max(1, ctx.workers)},
                      {"seed", ctx.seed},
                      {"versions",
                       {{"compiler", __VERSION__},
                        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                      "." + std::to_string(EIGEN_MINOR_VERSION)},
                        {"boost", BOOST_LIB_VERSION},
                        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
                      {"files", out.files},
                      {"timings", timings}};
  io::write_json((fs::path(ctx.out_dir) / "manifest.json").string(), manifest);
  return out;
}

io::Json calibrate(const RunConfig &cfg, int workers) {
  Env env(cfg, std::max(1, workers));
  env.require_three_wells();
  Json j;
  const double rate = env.min_rate();
  j["min_decay_rate"] = rate;

  // H¹ recovery: C(γ + e^{-cR}) with c = 2·rate, C twice the worst ratio
  const double c_split = 2 * rate;
  double worst = 0;
  Json split = Json::array();
  for (double R : cfg.structure1d.calib_R) {
    const Json row = split_row(env, R, 1.0, c_split);
    const double h1 = std::max(row["h1_sq_12"].get<double>(), row["h1_sq_23"].get<double>());
    const double ratio = h1 / row["h1_bound"].get<double>();
    worst = std::max(worst, ratio);
    split.push_back({{"R", R}, {"h1", h1}, {"scale", row["h1_bound"]}, {"ratio", ratio}});
  }
  j["split_runs"] = split;
  j["split_c"] = c_split;
  j["split_C"] = 2 * worst;

  // competitor gap against the error terms of the upper bound, 1.5× the worst ratio
  double worst_up = 0;
  Json up = Json::array();
  for (double R : cfg.disk.calib_R) {
    const auto tr = env.trace(R);
    const auto ar = env.angles(tr);
    const double ell = ar.angles.ell();
    const Json rows = upper_rows(env, tr, ar, {ell}, cfg.disk.h, nullptr);
    const double gap = rows[0]["gap"].get<double>();
    const double tail = disk::upper_bound_formula(ar.angles, ell, cfg.disk.rho, env.sigma(R), env.eta(),
                                                  env.gamma_of(ar), {1.0, rate}, 0.0, 0.0);
    worst_up = std::max(worst_up, gap / tail);
    up.push_back({{"R", R}, {"ell", ell}, {"gap", gap}, {"tail", tail}, {"ratio", gap / tail}});
  }
  j["upper_runs"] = up;
  j["upper_c"] = rate;
  j["upper_C"] = 1.5 * worst_up;
  j["slice_c"] = rate;
  j["tail_c"] = rate;
  j["tail_C"] = 1.0;
  j["final_c"] = 0.0;
  j["final_C"] = 1.0;
  return j;
}

} // namespace triwell::cli
