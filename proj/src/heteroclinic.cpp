#include "triwell/heteroclinic.hpp"
#include "triwell/fit.hpp"

#include <algorithm>
#include <cmath>

namespace triwell::hetero {

Vec2 HeteroclinicProfile::truncated(double s, double ell) const {
  const Vec2 &pi = left_well();
  const Vec2 &pj = right_well();
  if (s <= -ell) return pi;
  if (s >= ell) return pj;
  if (s < -ell + 1) {
    const double w = s + ell;
    return (1 - w) * pi + w * eval(-ell + 1);
  }
  if (s > ell - 1) {
    const double w = s - (ell - 1);
    return (1 - w) * eval(ell - 1) + w * pj;
  }
  return eval(s);
}

HeteroclinicProfile HeteroclinicProfile::reversed() const {
  HeteroclinicProfile r = *this;
  std::swap(r.i, r.j);
  std::reverse(r.path.samples.begin(), r.path.samples.end());
  r.path.t_start = -path.t_end;
  r.path.t_end = -path.t_start;
  r.midpoint_shift = -midpoint_shift;
  std::swap(r.decay_left, r.decay_right);
  return r;
}

std::pair<double, double> ode_residual(const Potential &pot, const Path1D &path) {
  const double h = path.h();
  double sup = 0, l2 = 0;
  for (std::size_t k = 1; k + 1 < path.size(); ++k) {
    const Vec2 r = (path[k + 1] - 2 * path[k] + path[k - 1]) / (h * h) - pot.derivatives(path[k]).grad;
    sup = std::max(sup, r.norm());
    l2 += h * r.squaredNorm();
  }
  return {sup, std::sqrt(l2)};
}

HeteroclinicProfile solve_heteroclinic(const Potential &pot, int i, int j, double L, std::size_t n,
                                       const SolveOptions &opt) {
  if (i == j || i < 1 || j < 1 || std::size_t(i) > pot.well_count() ||
      std::size_t(j) > pot.well_count())
    throw PreconditionError("solve_heteroclinic: invalid well pair");
  if (n < 5 || !(L > 0)) throw PreconditionError("solve_heteroclinic: need L > 0 and n >= 5");
  const Well &wi = pot.well(i), &wj = pot.well(j);
  for (const Well *w : {&wi, &wj})
    if (std::exp(-std::sqrt(w->lambda1()) * L) >= 0.01)
      throw PreconditionError("solve_heteroclinic: L too small for the slowest decay rate");

  HeteroclinicProfile prof;
  prof.i = i;
  prof.j = j;
  std::vector<Vec2> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = -L + 2 * L * double(k) / double(n - 1);
    const double s = 0.5 * (1 + std::tanh((t - opt.init_shift) / opt.init_width));
    x[k] = wi.position + s * (wj.position - wi.position);
  }
  x.front() = wi.position;
  x.back() = wj.position;
  prof.path = Path1D(-L, L, std::move(x));
  std::vector<char> pinned(n, 0);
  pinned.front() = pinned.back() = 1;
  const ChainResult cr = minimize_chain(pot, prof.path, pinned, opt.chain);
  prof.converged = cr.converged;
  prof.connection_energy = energy_1d(pot, prof.path);
  std::tie(prof.residual, prof.residual_l2) = ode_residual(pot, prof.path);

  if (pot.well_count() == 3) {
    const int k = 6 - i - j;
    const Vec2 pk = pot.well(k).position;
    double g = INFINITY;
    for (const auto &y : prof.path.samples) g = std::min(g, (y - pk).norm());
    prof.min_gap_other = g;
    prof.no_direct_connection = g < 0.05;
  }
  if (prof.no_direct_connection) return prof;
  if (opt.normalize) prof = midpoint_normalize(pot, prof, opt);
  if (opt.fit_decay) {
    try {
      prof.decay_left = decay_fit(prof.path, Side::Left).rate;
      prof.decay_right = decay_fit(prof.path, Side::Right).rate;
    } catch (const PreconditionError &) {
      // window too short; rates stay unfitted
    }
  }
  return prof;
}

HeteroclinicProfile midpoint_normalize(const Potential &pot, const HeteroclinicProfile &profile,
                                       const SolveOptions &opt) {
  const Path1D &p = profile.path;
  const Vec2 a = profile.left_well(), b = profile.right_well();
  if ((a - b).norm() < 1e-12) throw PreconditionError("midpoint_normalize: profile does not connect distinct wells");
  auto g = [&](double s) {
    const Vec2 z = p.at(s);
    return metric::degenerate_distance(pot, a, z, opt.distance).value -
           metric::degenerate_distance(pot, b, z, opt.distance).value;
  };
  const int m = 64;
  double lo = 0, hi = 0, glo = 0;
  bool found = false;
  double sprev = p.t_start + (p.t_end - p.t_start) * 0.5 / m, gprev = g(sprev);
  for (int k = 1; k < m && !found; ++k) {
    const double s = p.t_start + (p.t_end - p.t_start) * (k + 0.5) / m;
    const double gs = g(s);
    if ((gprev <= 0 && gs >= 0) || (gprev >= 0 && gs <= 0)) {
      lo = sprev;
      hi = s;
      glo = gprev;
      found = true;
    }
    sprev = s;
    gprev = gs;
  }
  if (!found) throw PreconditionError("midpoint_normalize: no sign change; profile does not transition");
  double s = 0.5 * (lo + hi), gs = g(s);
  for (int it = 0; it < 80 && std::abs(gs) >= opt.tol_mid; ++it) {
    if ((gs < 0) == (glo < 0)) {
      lo = s;
      glo = gs;
    } else {
      hi = s;
    }
    s = 0.5 * (lo + hi);
    gs = g(s);
  }
  HeteroclinicProfile r = profile;
  r.path.t_start -= s;
  r.path.t_end -= s;
  r.midpoint_shift += s;
  return r;
}

DecayFit decay_fit(const Path1D &path, Side side, double lo, double hi) {
  const Vec2 p = side == Side::Right ? path.samples.back() : path.samples.front();
  std::vector<double> t, y;
  for (std::size_t k = 0; k < path.size(); ++k) {
    const double r = (path[k] - p).norm();
    if (r > lo && r < hi) {
      t.push_back(path.t(k));
      y.push_back(std::log(r));
    }
  }
  if (t.size() < 10) throw PreconditionError("decay_fit: fewer than 10 samples in the tail window");
  const LinearFit f = linear_fit(t, y);
  DecayFit d;
  d.rate = side == Side::Right ? -f.slope : f.slope;
  d.prefactor = std::exp(f.intercept);
  d.r2 = f.r2;
  d.samples = int(t.size());
  return d;
}

namespace {

// Block LDLᵀ of the shifted operator; reused for every right-hand side.
struct ShiftedOperator {
  std::vector<Mat2> inv;
  double off = 0;
  bool factor(const std::vector<Mat2> &diag, double h, double sigma) {
    const std::size_t m = diag.size();
    off = -1.0 / (h * h);
    inv.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      Mat2 P = diag[k] - sigma * Mat2::Identity();
      if (k > 0) P -= off * off * inv[k - 1];
      const double det = P.determinant();
      if (!(P(0, 0) > 0) || !(det > 0)) return false;
      inv[k] = P.inverse();
    }
    return true;
  }
  void solve(const Eigen::VectorXd &b, Eigen::VectorXd &x) const {
    const std::size_t m = inv.size();
    std::vector<Vec2> z(m);
    for (std::size_t k = 0; k < m; ++k) {
      Vec2 r = b.segment<2>(Eigen::Index(2 * k));
      if (k > 0) r -= off * (inv[k - 1] * z[k - 1]);
      z[k] = r;
    }
    x.resize(b.size());
    Vec2 next = Vec2::Zero();
    for (std::size_t k = m; k-- > 0;) {
      Vec2 r = z[k];
      if (k + 1 < m) r -= off * next;
      next = inv[k] * r;
      x.segment<2>(Eigen::Index(2 * k)) = next;
    }
  }
};

std::vector<Mat2> operator_diag(const Potential &pot, const Path1D &path) {
  const double h = path.h();
  std::vector<Mat2> d;
  for (std::size_t k = 1; k + 1 < path.size(); ++k)
    d.push_back(2.0 / (h * h) * Mat2::Identity() + pot.derivatives(path[k]).hess);
  return d;
}

} // namespace

Eigen::VectorXd apply_linearized(const Potential &pot, const Path1D &path, const Eigen::VectorXd &v) {
  const double h = path.h();
  const auto diag = operator_diag(pot, path);
  const Eigen::Index m = Eigen::Index(diag.size());
  Eigen::VectorXd out(v.size());
  for (Eigen::Index k = 0; k < m; ++k) {
    Vec2 r = diag[std::size_t(k)] * v.segment<2>(2 * k);
    if (k > 0) r -= v.segment<2>(2 * (k - 1)) / (h * h);
    if (k + 1 < m) r -= v.segment<2>(2 * (k + 1)) / (h * h);
    out.segment<2>(2 * k) = r;
  }
  return out;
}

SpectrumReport linearized_spectrum(const Potential &pot, const Path1D &path, int k,
                                   const SpectrumOptions &opt) {
  path.validate();
  const auto diag = operator_diag(pot, path);
  const Eigen::Index dim = Eigen::Index(2 * diag.size());
  const int p = std::min<int>(k + opt.extra_block, int(dim));
  if (k < 1 || k > dim) throw PreconditionError("linearized_spectrum: bad eigenpair count");

  ShiftedOperator op;
  double sigma = opt.shift;
  while (!op.factor(diag, path.h(), sigma)) sigma = 2 * sigma - 0.1;

  const Eigen::Index m = Eigen::Index(diag.size());
  Eigen::MatrixXd X(dim, p);
  for (int c = 0; c < p; ++c)
    for (Eigen::Index i = 0; i < m; ++i) {
      const double mode = c / 2 + 1;
      const double s = std::sin(mode * M_PI * double(i + 1) / double(m + 1));
      const double s2 = std::sin((mode + 1) * M_PI * double(i + 1) / double(m + 1));
      X(2 * i + (c % 2), c) = s;
      X(2 * i + 1 - (c % 2), c) = 0.1 * s2;
    }

  SpectrumReport rep;
  Eigen::VectorXd y;
  Eigen::VectorXd mu;
  Eigen::MatrixXd AX(dim, p);
  std::vector<double> res(std::size_t(k), INFINITY);
  int it = 0;
  for (; it < opt.max_iters; ++it) {
    for (int c = 0; c < p; ++c) {
      op.solve(X.col(c), y);
      X.col(c) = y;
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    X = qr.householderQ() * Eigen::MatrixXd::Identity(dim, p);
    for (int c = 0; c < p; ++c) AX.col(c) = apply_linearized(pot, path, X.col(c));
    Eigen::MatrixXd G = X.transpose() * AX;
    G = 0.5 * (G + G.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    X = X * es.eigenvectors();
    AX = AX * es.eigenvectors();
    mu = es.eigenvalues();
    bool done = true;
    for (int c = 0; c < k; ++c) {
      res[std::size_t(c)] = (AX.col(c) - mu(c) * X.col(c)).norm();
      done = done && res[std::size_t(c)] < opt.tol * std::max(1.0, std::abs(mu(c)));
    }
    if (done) break;
  }
  rep.iterations = it;
  if (it >= opt.max_iters) {
    std::string msg = "linearized_spectrum: no convergence; residuals";
    for (double r : res) msg += " " + std::to_string(r);
    throw ConvergenceError(msg);
  }
  for (int c = 0; c < k; ++c) {
    rep.eigenvalues.push_back(mu(c));
    rep.residuals.push_back(res[std::size_t(c)]);
  }
  int iz = 0;
  for (int c = 1; c < k; ++c)
    if (std::abs(mu(c)) < std::abs(mu(iz))) iz = c;
  rep.near_zero_index = iz;
  rep.near_zero = mu(iz);
  rep.next = iz + 1 < p ? mu(iz + 1) : NAN;
  rep.gap = rep.next - rep.near_zero;

  Eigen::VectorXd dz(dim);
  const double h = path.h();
  for (Eigen::Index i = 0; i < m; ++i)
    dz.segment<2>(2 * i) = (path[std::size_t(i + 2)] - path[std::size_t(i)]) / (2 * h);
  const double nz = dz.norm();
  rep.overlap = nz > 0 ? std::abs(X.col(iz).dot(dz)) / (X.col(iz).norm() * nz) : 0.0;
  return rep;
}

namespace {

// Tail direction at the right end, averaged over the decay window.
double tail_angle(const Path1D &path, const Vec2 &p, const Vec2 &e) {
  Vec2 acc = Vec2::Zero();
  int cnt = 0;
  const double h = path.h();
  for (std::size_t k = 1; k + 1 < path.size(); ++k) {
    const double r = (path[k] - p).norm();
    if (r > 1e-6 && r < 1e-2) {
      const Vec2 d = (path[k + 1] - path[k - 1]) / (2 * h);
      if (d.norm() > 1e-14) {
        acc += d.normalized();
        ++cnt;
      }
    }
  }
  if (cnt == 0 || acc.norm() < 1e-14) throw PreconditionError("p2_alignment: degenerate tail");
  return std::acos(std::clamp(acc.normalized().dot(e), -1.0, 1.0));
}

} // namespace

Alignment p2_alignment(const Potential &pot, const HeteroclinicProfile &z12,
                       const HeteroclinicProfile &z32, double tol_deg) {
  const Well &w2 = pot.well(2);
  for (const auto *z : {&z12, &z32})
    if ((z->right_well() - w2.position).norm() > 1e-12)
      throw PreconditionError("p2_alignment: profiles must terminate at p2");
  Alignment a;
  const Vec2 e = w2.slow_direction();
  a.angle12 = tail_angle(z12.path, w2.position, e);
  a.angle32 = tail_angle(z32.path, w2.position, e);
  const double tol = tol_deg * M_PI / 180.0;
  auto axial = [&](double th) { return std::min(th, M_PI - th) < tol; };
  a.generic = axial(a.angle12) && axial(a.angle32);
  return a;
}

Truncation truncate_heteroclinic(const Potential &pot, const HeteroclinicProfile &profile,
                                 double ell) {
  if (ell < 2) throw PreconditionError("truncate_heteroclinic: need ell >= 2");
  Truncation tr;
  const Path1D &p = profile.path;
  const double support = std::min(-p.t_start, p.t_end) + 1.0;
  if (ell > support) {
    ell = support;
    tr.clamped = true;
  }
  tr.ell = ell;
  tr.path = p;
  const double h = p.h();
  for (std::size_t k = 0; k < p.size(); ++k) tr.path[k] = profile.truncated(p.t(k), ell);
  // local energy difference: only segments touching modified samples
  auto seg = [&](const Vec2 &a, const Vec2 &b) {
    return 0.5 * (b - a).squaredNorm() / h + 0.5 * h * (pot.W(a) + pot.W(b));
  };
  for (std::size_t k = 0; k + 1 < p.size(); ++k) {
    if (tr.path[k] == p[k] && tr.path[k + 1] == p[k + 1]) continue;
    tr.excess += seg(tr.path[k], tr.path[k + 1]) - seg(p[k], p[k + 1]);
  }
  for (std::size_t k = 0; k < p.size(); ++k) tr.l2_sq += h * (tr.path[k] - p[k]).squaredNorm();
  tr.energy = profile.connection_energy + tr.excess;
  return tr;
}

TruncationFit fit_truncation(const Potential &pot, const HeteroclinicProfile &profile,
                             const std::vector<double> &ells) {
  std::vector<double> le, ye, ll, yl;
  for (double ell : ells) {
    const Truncation t = truncate_heteroclinic(pot, profile, ell);
    if (t.excess > 0) {
      le.push_back(ell);
      ye.push_back(std::log(t.excess));
    }
    if (t.l2_sq > 0) {
      ll.push_back(ell);
      yl.push_back(std::log(t.l2_sq));
    }
  }
  TruncationFit f;
  if (le.size() >= 2) {
    const auto a = linear_fit(le, ye);
    f.A_energy = std::exp(a.intercept);
    f.a_energy = -a.slope;
    f.r2_energy = a.r2;
  }
  if (ll.size() >= 2) {
    const auto a = linear_fit(ll, yl);
    f.A_l2 = std::exp(a.intercept);
    f.a_l2 = -a.slope;
    f.r2_l2 = a.r2;
  }
  return f;
}

} // namespace triwell::hetero
