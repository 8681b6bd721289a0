#include "triwell/structure1d.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace triwell::structure {

namespace {

std::vector<double> segment_energies(const Potential &pot, const Path1D &path) {
  const double h = path.h();
  std::vector<double> W(path.size()), e(path.size() - 1);
  for (std::size_t k = 0; k < path.size(); ++k) W[k] = pot.W(path[k]);
  for (std::size_t k = 0; k + 1 < path.size(); ++k)
    e[k] = 0.5 * (path[k + 1] - path[k]).squaredNorm() / h + 0.5 * h * (W[k] + W[k + 1]);
  return e;
}

Interval make_interval(const Path1D &path, const std::vector<double> &seg, std::size_t k0,
                       std::size_t k1, int label) {
  Interval I;
  I.k0 = k0;
  I.k1 = k1;
  I.t0 = path.t(k0);
  I.t1 = path.t(k1);
  I.label = label;
  for (std::size_t k = k0; k < k1; ++k) I.energy += seg[k];
  return I;
}

// parameter where the cumulative energy inside I reaches half
double energy_median(const Path1D &path, const std::vector<double> &seg, const Interval &I) {
  const double half = 0.5 * I.energy;
  double acc = 0;
  for (std::size_t k = I.k0; k < I.k1; ++k) {
    if (acc + seg[k] >= half) {
      const double w = seg[k] > 0 ? (half - acc) / seg[k] : 0.5;
      return path.t(k) + w * path.h();
    }
    acc += seg[k];
  }
  return I.t1;
}

double best_grid_shift(const Path1D &f, const hetero::HeteroclinicProfile &z, double centre,
                       double search, double w0, double w1) {
  const double h = f.h();
  const double base = f.t_start + std::round((centre - f.t_start) / h) * h;
  const int J = std::max(1, int(std::ceil(search / h)));
  double best = INFINITY, bs = base;
  for (int j = -J; j <= J; ++j) {
    const double s = base + j * h;
    const double d = h1_sq_distance(f, [&](double t) { return z.eval(t - s); }, w0, w1);
    if (d < best) {
      best = d;
      bs = s;
    }
  }
  return bs;
}

} // namespace

std::string TransitionDecomposition::sequence_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < sequence.size(); ++i) os << (i ? "," : "") << "p" << sequence[i];
  return os.str();
}

TransitionDecomposition transition_decomposition(const Potential &pot, const Path1D &path,
                                                 const metric::DistanceOracle &oracle) {
  path.validate();
  const double eta = oracle.eta();
  const std::size_t n = path.size();
  std::vector<double> d(n);
  std::vector<int> lab(n);
  for (std::size_t k = 0; k < n; ++k) std::tie(lab[k], d[k]) = oracle.nearest(path[k]);
  if (d.front() > eta || d.back() > eta)
    throw PreconditionError("transition_decomposition: path endpoint not within eta of a well");

  TransitionDecomposition dec;
  dec.eta = eta;
  const auto seg = segment_energies(pot, path);
  for (double e : seg) dec.total_energy += e;

  std::vector<std::pair<std::size_t, std::size_t>> trans; // node ranges incl. the η-endpoints
  for (std::size_t k = 0; k < n;) {
    if (d[k] <= eta) {
      ++k;
      continue;
    }
    std::size_t j = k;
    double peak = 0;
    while (j < n && d[j] > eta) peak = std::max(peak, d[j++]);
    if (peak > 4 * eta) trans.emplace_back(k - 1, j);
    k = j;
  }
  std::size_t start = 0;
  auto add_plateau = [&](std::size_t k0, std::size_t k1) {
    Interval P = make_interval(path, seg, k0, k1, lab[k0]);
    if (lab[k1] != lab[k0]) {
      std::ostringstream os;
      os << "plateau [" << P.t0 << ", " << P.t1 << "] has endpoints near p" << lab[k0] << " and p"
         << lab[k1];
      dec.anomalies.push_back(os.str());
    }
    for (std::size_t k = k0; k <= k1; ++k)
      if (oracle.distance(P.label, path[k]) > 4 * eta) {
        std::ostringstream os;
        os << "plateau labelled p" << P.label << " leaves the 4eta ball at t=" << path.t(k);
        dec.anomalies.push_back(os.str());
        break;
      }
    if (std::find(dec.sequence.begin(), dec.sequence.end(), P.label) != dec.sequence.end())
      dec.anomalies.push_back("well p" + std::to_string(P.label) + " appears twice");
    dec.sequence.push_back(P.label);
    dec.plateaus.push_back(P);
  };
  for (const auto &[k0, k1] : trans) {
    add_plateau(start, k0);
    dec.transitions.push_back(make_interval(path, seg, k0, k1, 0));
    start = k1;
  }
  add_plateau(start, n - 1);
  return dec;
}

TransitionDecomposition transition_decomposition(const Potential &pot, const Path1D &path,
                                                 double eta) {
  return transition_decomposition(pot, path, metric::DistanceOracle(pot, eta));
}

double h1_sq_distance(const Path1D &f, const std::function<Vec2(double)> &g, double w0, double w1) {
  const double h = f.h();
  double s = 0;
  bool have_prev = false;
  Vec2 prev;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double t = f.t(k);
    if (t < w0 - 1e-12 || t > w1 + 1e-12) {
      have_prev = false;
      continue;
    }
    const Vec2 e = f[k] - g(t);
    s += h * e.squaredNorm();
    if (have_prev) s += (e - prev).squaredNorm() / h;
    prev = e;
    have_prev = true;
  }
  return s;
}

SplitPoints locate_split(const Potential &pot, const Path1D &path,
                         const metric::DistanceOracle &oracle, const hetero::HeteroclinicProfile &z12,
                         const hetero::HeteroclinicProfile &z23, const SplitOptions &opt) {
  SplitPoints sp;
  sp.decomposition = transition_decomposition(pot, path, oracle);
  const auto &dec = sp.decomposition;
  if (dec.transitions.size() != 2 || dec.sequence != std::vector<int>{1, 2, 3})
    throw StructureError("locate_split: expected plateaus p1,p2,p3 with two transitions, found " +
                         dec.sequence_string());
  const auto seg = segment_energies(pot, path);
  sp.a_median = energy_median(path, seg, dec.transitions[0]);
  sp.b_median = energy_median(path, seg, dec.transitions[1]);

  // T: argmin of |f - p2| on the middle plateau, median of ties
  const Vec2 p2 = pot.well(2).position;
  const Interval &mid = dec.plateaus[1];
  double gmin = INFINITY;
  for (std::size_t k = mid.k0; k <= mid.k1; ++k) gmin = std::min(gmin, (path[k] - p2).norm());
  std::vector<std::size_t> ties;
  for (std::size_t k = mid.k0; k <= mid.k1; ++k)
    if ((path[k] - p2).norm() <= gmin + opt.tie_tol) ties.push_back(k);
  const std::size_t kT = ties[ties.size() / 2];
  sp.T = path.t(kT);
  sp.p2_gap = (path[kT] - p2).norm();

  const double c = 0.5 * (path.t_start + path.t_end);
  const double Rh = 0.5 * (path.t_end - path.t_start);
  sp.a = best_grid_shift(path, z12, sp.a_median, opt.search, c - Rh / 2, sp.T);
  sp.b = best_grid_shift(path, z23, sp.b_median, opt.search, sp.T, c + Rh / 2);
  auto g12 = [&](double t) { return z12.eval(t - sp.a); };
  auto g23 = [&](double t) { return z23.eval(t - sp.b); };
  sp.h1_sq_12 = h1_sq_distance(path, g12, c - Rh / 2, sp.T);
  sp.h1_sq_23 = h1_sq_distance(path, g23, sp.T, c + Rh / 2);
  sp.h1_sq_12_recentered = h1_sq_distance(path, g12, sp.a - Rh / 2, sp.T);
  sp.h1_sq_23_recentered = h1_sq_distance(path, g23, sp.T, sp.b + Rh / 2);

  sp.gamma = dec.total_energy - (z12.connection_energy + z23.connection_energy);
  sp.separation = std::min(sp.T - sp.a, sp.b - sp.T);
  const double lg = sp.gamma > 0 ? std::abs(std::log(sp.gamma)) : INFINITY;
  sp.separation_c = sp.separation / std::min(lg, Rh);
  return sp;
}

EndwellBound lower_bound_endwell(const Potential &pot, const Path1D &path, const Well &well,
                                 double eta, double A, double a) {
  path.validate();
  EndwellBound r;
  r.distance = metric::degenerate_distance(pot, well.position, path.samples.front()).value;
  if (r.distance > eta)
    throw PreconditionError("lower_bound_endwell: start lies outside the convexity radius");
  r.energy = energy_1d(pot, path);
  const double R = path.t_end - path.t_start;
  r.bound = r.distance - A * std::exp(-a * R);
  r.slack = r.energy - r.bound;
  return r;
}

namespace {

quad pinned_start_energy(const Potential &pot, const Vec2 &start, const Vec2 &well, double R,
                         double h, bool &converged) {
  const std::size_t n = std::size_t(std::llround(R / h)) + 1;
  std::vector<Vec2T<quad>> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = double(k) * h;
    const Vec2 y = well + std::exp(-2.0 * t) * (start - well);
    x[k] = Vec2T<quad>(quad(y(0)), quad(y(1)));
  }
  x[0] = Vec2T<quad>(quad(start(0)), quad(start(1)));
  std::vector<char> pinned(n, 0);
  pinned[0] = 1;
  auto eval = [&](const Vec2T<quad> &u) { return pot.derivatives(u); };
  const quad hq = quad(R) / quad(n - 1);
  const ChainResult cr = minimize_chain<quad>(eval, hq, x, pinned, ChainOptions{200, 1e-26});
  converged = cr.converged;
  return chain_energy<quad>(eval, hq, x);
}

} // namespace

EndwellStudy endwell_decay_study(const Potential &pot, int well, const Vec2 &start,
                                 const std::vector<double> &Rs, double h, double R_ref) {
  const Vec2 p = pot.well(well).position;
  EndwellStudy st;
  bool ok = true;
  const quad ref = pinned_start_energy(pot, start, p, R_ref, h, ok);
  st.converged = ok;
  st.reference = double(ref);
  std::vector<double> x, y;
  for (double R : Rs) {
    const quad e = pinned_start_energy(pot, start, p, R, h, ok);
    st.converged = st.converged && ok;
    const double s = double(e - ref);
    st.R.push_back(R);
    st.energy.push_back(double(e));
    st.slack.push_back(s);
    if (s != 0) {
      x.push_back(R);
      y.push_back(std::log(std::abs(s)));
    }
  }
  if (x.size() >= 2) st.fit = linear_fit(x, y);
  return st;
}

InteriorBound interior_well_bound(const Potential &pot, const Path1D &path, double eta, double eps,
                                  double tol_eta) {
  path.validate();
  const Well &w2 = pot.well(2);
  const Vec2 a = path.samples.front() - w2.position, b = path.samples.back() - w2.position;
  const Vec2 ca = w2.eigenvectors.transpose() * a, cb = w2.eigenvectors.transpose() * b;
  if (!(ca(0) < 0 && cb(0) > 0))
    throw PreconditionError("interior_well_bound: endpoints must lie on opposite sides (a1 < 0 < b1)");
  if (std::abs(ca(1)) > eps * std::abs(ca(0)) || std::abs(cb(1)) > eps * std::abs(cb(0)))
    throw PreconditionError("interior_well_bound: endpoint eccentricity exceeds eps");
  const double da = metric::degenerate_distance(pot, w2.position, path.samples.front()).value;
  const double db = metric::degenerate_distance(pot, w2.position, path.samples.back()).value;
  if (std::abs(da - eta) > tol_eta * eta || std::abs(db - eta) > tol_eta * eta)
    throw PreconditionError("interior_well_bound: endpoints are not at distance eta from p2");
  InteriorBound r;
  r.energy = energy_1d(pot, path);
  r.excess = r.energy - 2 * eta;
  r.min_sq = INFINITY;
  for (const auto &x : path.samples) r.min_sq = std::min(r.min_sq, (x - w2.position).squaredNorm());
  return r;
}

std::pair<Vec2, Vec2> p2_endpoints(const Potential &pot, double eta) {
  const Well &w2 = pot.well(2);
  const Vec2 e = w2.slow_direction();
  auto solve = [&](double sign) {
    double lo = 0, hi = 0.05;
    while (metric::degenerate_distance(pot, w2.position, w2.position + sign * hi * e).value < eta)
      hi *= 2;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (metric::degenerate_distance(pot, w2.position, w2.position + sign * mid * e).value < eta ? lo : hi) = mid;
    }
    return Vec2(w2.position + sign * 0.5 * (lo + hi) * e);
  };
  return {solve(-1.0), solve(1.0)};
}

PenaltyStudy interior_penalty_study(const Potential &pot, double eta, double R, double h,
                                    const std::vector<double> &deltas) {
  PenaltyStudy st;
  std::tie(st.a, st.b) = p2_endpoints(pot, eta);
  const Well &w2 = pot.well(2);
  const Vec2 ef = w2.eigenvectors.col(1);
  std::size_t n = std::size_t(std::llround(2 * R / h)) + 1;
  if (n % 2 == 0) ++n;
  const std::size_t mid = n / 2;
  auto run = [&](double delta, bool pin_mid) {
    Path1D p = segment_path(st.a, st.b, n, -R, R);
    std::vector<char> pinned(n, 0);
    pinned[0] = pinned[n - 1] = 1;
    if (pin_mid) {
      p[mid] = w2.position + delta * ef;
      for (std::size_t k = 1; k < n - 1; ++k) {
        const double s = double(k) / double(n - 1);
        const Vec2 base = (1 - s) * st.a + s * st.b;
        p[k] = base + (1.0 - std::abs(2 * s - 1)) * delta * ef;
      }
      pinned[mid] = 1;
    }
    minimize_chain(pot, p, pinned, ChainOptions{400, 1e-9});
    return interior_well_bound(pot, p, eta, 1e-6);
  };
  st.excess_through = run(0.0, false).excess;
  std::vector<double> x;
  for (double d : deltas) {
    const InteriorBound ib = run(d, true);
    st.delta.push_back(d);
    st.excess.push_back(ib.excess);
    st.min_sq.push_back(ib.min_sq);
    x.push_back(d * d);
  }
  const LinearFit f = linear_fit(x, st.excess);
  st.c = f.slope;
  st.r2 = f.r2;
  st.c_minsq = linear_fit(st.min_sq, st.excess).slope;
  return st;
}

SchatzmanGap schatzman_gap(const Potential &pot, const Path1D &candidate,
                           const hetero::HeteroclinicProfile &reference, double beta) {
  candidate.validate();
  const double h = candidate.h();
  const double w0 = candidate.t_start, w1 = candidate.t_end;
  auto dist = [&](double s) {
    return h1_sq_distance(candidate, [&](double t) { return reference.eval(t - s); }, w0, w1);
  };
  const double span = 0.5 * (w1 - w0);
  const int J = int(std::ceil(span / h));
  double best = INFINITY, bs = 0;
  for (int j = -J; j <= J; ++j) {
    const double d = dist(j * h);
    if (d < best) {
      best = d;
      bs = j * h;
    }
  }
  if (std::sqrt(best) > beta)
    throw PreconditionError("schatzman_gap: candidate is not H1-close to any shift of the reference");
  // golden section on the bracketing cell pair
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = bs - h, hi = bs + h;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = dist(x1), f2 = dist(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = dist(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = dist(x2);
    }
  }
  SchatzmanGap g;
  g.best_shift = 0.5 * (lo + hi);
  g.h1_sq_distance = std::min(dist(g.best_shift), best);
  if (best < g.h1_sq_distance) g.best_shift = bs;
  g.energy_excess = energy_1d(pot, candidate) - reference.connection_energy;
  g.ratio = g.h1_sq_distance / std::max(g.energy_excess, 1e-14);
  return g;
}

} // namespace triwell::structure
