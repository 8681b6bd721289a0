#include "triwell/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace triwell::metric {

namespace {

constexpr double kPi = std::numbers::pi;

struct Weight {
  double w;
  Vec2 g;
  Mat2 H;
};

// w = √(2W) with derivatives; the cone point at a well has g = H = 0.
Weight weight(const Potential &pot, const Vec2 &x) {
  const auto d = pot.derivatives(x);
  Weight r;
  const double W = std::max(d.W, 0.0);
  r.w = std::sqrt(2.0 * W);
  if (r.w < 1e-150) {
    r.g.setZero();
    r.H.setZero();
    return r;
  }
  r.g = d.grad / r.w;
  r.H = d.hess / r.w - r.g * r.g.transpose() / r.w;
  return r;
}

double action(const Potential &pot, const std::vector<Vec2> &x) {
  double a = 0.0;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    const Vec2 d = x[k + 1] - x[k];
    a += std::sqrt(2.0 * std::max(pot.W(0.5 * (x[k] + x[k + 1])), 0.0)) * d.norm();
  }
  return a;
}

// Resample a polyline to n nodes at equal arclength.
std::vector<Vec2> reparametrize(const std::vector<Vec2> &x, std::size_t n) {
  const std::size_t m = x.size();
  std::vector<double> s(m, 0.0);
  for (std::size_t k = 1; k < m; ++k) s[k] = s[k - 1] + (x[k] - x[k - 1]).norm();
  const double L = s.back();
  std::vector<Vec2> y(n);
  y.front() = x.front();
  y.back() = x.back();
  if (L <= 0.0) {
    std::fill(y.begin(), y.end(), x.front());
    return y;
  }
  std::size_t j = 0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double target = L * double(k) / double(n - 1);
    while (j + 2 < m && s[j + 1] < target) ++j;
    const double seg = s[j + 1] - s[j];
    const double w = seg > 0 ? (target - s[j]) / seg : 0.0;
    y[k] = (1.0 - w) * x[j] + w * x[j + 1];
  }
  return y;
}

// Normal-direction gradient and tridiagonal Hessian of the discrete action.
struct NormalSystem {
  std::vector<Vec2> normal;
  std::vector<double> g, diag, off; // off[k] couples interior k and k+1
};

NormalSystem assemble(const Potential &pot, const std::vector<Vec2> &x) {
  const std::size_t n = x.size();
  std::vector<Vec2> G(n, Vec2::Zero());
  std::vector<Mat2> Hd(n, Mat2::Zero());
  std::vector<Mat2> Hlo(n, Mat2::Zero()); // Hlo[k] = ∂²A/∂x_{k+1}∂x_k
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Vec2 d = x[k + 1] - x[k];
    const double e = d.norm();
    if (e < 1e-300) continue;
    const Vec2 dh = d / e;
    const Weight wt = weight(pot, 0.5 * (x[k] + x[k + 1]));
    const Mat2 P = (Mat2::Identity() - dh * dh.transpose()) / e;
    G[k] += 0.5 * e * wt.g - wt.w * dh;
    G[k + 1] += 0.5 * e * wt.g + wt.w * dh;
    const Mat2 A = 0.25 * e * wt.H;
    const Mat2 S = 0.5 * (wt.g * dh.transpose() + dh * wt.g.transpose());
    Hd[k] += A - S + wt.w * P;
    Hd[k + 1] += A + S + wt.w * P;
    Hlo[k] = A - 0.5 * wt.g * dh.transpose() + 0.5 * dh * wt.g.transpose() - wt.w * P;
  }
  NormalSystem ns;
  const std::size_t m = n - 2;
  ns.normal.resize(m);
  ns.g.resize(m);
  ns.diag.resize(m);
  ns.off.assign(m > 0 ? m - 1 : 0, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t k = i + 1;
    Vec2 t = x[k + 1] - x[k - 1];
    const double tn = t.norm();
    t = tn > 0 ? Vec2(t / tn) : Vec2(1, 0);
    ns.normal[i] = Vec2(-t(1), t(0));
    ns.g[i] = ns.normal[i].dot(G[k]);
    ns.diag[i] = ns.normal[i].dot(Hd[k] * ns.normal[i]);
  }
  for (std::size_t i = 0; i + 1 < m; ++i)
    ns.off[i] = ns.normal[i + 1].dot(Hlo[i + 1] * ns.normal[i]);
  return ns;
}

// LDLᵀ of a symmetric tridiagonal matrix; false if a pivot is not positive.
bool solve_tridiag(const std::vector<double> &diag, const std::vector<double> &off, double shift,
                   const std::vector<double> &rhs, std::vector<double> &out) {
  const std::size_t m = diag.size();
  std::vector<double> D(m), Lo(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    double di = diag[i] + shift;
    if (i > 0) {
      Lo[i] = off[i - 1] / D[i - 1];
      di -= Lo[i] * off[i - 1];
    }
    if (!(di > 0.0) || !std::isfinite(di)) return false;
    D[i] = di;
  }
  for (std::size_t i = 0; i < m; ++i) y[i] = rhs[i] - (i > 0 ? Lo[i] * y[i - 1] : 0.0);
  out.assign(m, 0.0);
  for (std::size_t i = m; i-- > 0;) {
    out[i] = y[i] / D[i] - (i + 1 < m ? Lo[i + 1] * out[i + 1] : 0.0);
  }
  return true;
}

struct LevelResult {
  std::vector<Vec2> x;
  double value;
  double residual;
  int iterations;
  bool converged;
};

LevelResult relax(const Potential &pot, std::vector<Vec2> x, int max_iters, double tol) {
  const std::size_t n = x.size();
  x = reparametrize(x, n);
  double A = action(pot, x);
  double nu = -1.0;
  LevelResult r{x, A, INFINITY, 0, false};
  if (n < 3) {
    r.residual = 0;
    r.converged = true;
    return r;
  }
  double seglen = 0;
  for (std::size_t k = 0; k + 1 < n; ++k) seglen += (x[k + 1] - x[k]).norm();
  seglen /= double(n - 1);
  for (int it = 0; it < max_iters; ++it) {
    const NormalSystem ns = assemble(pot, x);
    double res = 0;
    for (double v : ns.g) res = std::max(res, std::abs(v));
    r.residual = res;
    r.iterations = it;
    if (res < tol) {
      r.converged = true;
      break;
    }
    double scale = 0;
    for (double v : ns.diag) scale = std::max(scale, std::abs(v));
    if (nu < 0) nu = 1e-6 * scale;
    std::vector<double> rhs(ns.g.size()), step;
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -ns.g[i];
    bool accepted = false;
    for (int tries = 0; tries < 40 && !accepted; ++tries) {
      if (!solve_tridiag(ns.diag, ns.off, nu, rhs, step)) {
        nu = std::max(10.0 * nu, 1e-12 * scale + 1e-300);
        continue;
      }
      double smax = 0;
      for (double v : step) smax = std::max(smax, std::abs(v));
      const double cap = 0.5 * seglen * double(n);
      const double fac = smax > cap ? cap / smax : 1.0;
      std::vector<Vec2> y = x;
      for (std::size_t i = 0; i < step.size(); ++i) y[i + 1] += fac * step[i] * ns.normal[i];
      y = reparametrize(y, n);
      const double Ay = action(pot, y);
      if (Ay <= A) {
        accepted = true;
        x = std::move(y);
        A = Ay;
        nu = std::max(nu / 4.0, 1e-14 * scale);
      } else {
        nu = std::max(10.0 * nu, 1e-10 * scale);
      }
    }
    if (!accepted) break; // stagnation at round-off level
  }
  r.x = std::move(x);
  r.value = A;
  if (!r.converged) {
    const NormalSystem ns = assemble(pot, r.x);
    double res = 0;
    for (double v : ns.g) res = std::max(res, std::abs(v));
    r.residual = res;
    r.converged = res < tol;
  }
  return r;
}

std::vector<Vec2> refine(const std::vector<Vec2> &x) {
  std::vector<Vec2> y;
  y.reserve(2 * x.size() - 1);
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    y.push_back(x[k]);
    y.push_back(0.5 * (x[k] + x[k + 1]));
  }
  y.push_back(x.back());
  return y;
}

std::vector<Vec2> initial_path(const Vec2 &p, const Vec2 &q, std::size_t n, double bend) {
  const Vec2 d = q - p;
  const Vec2 nrm(-d(1), d(0));
  std::vector<Vec2> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = double(k) / double(n - 1);
    x[k] = p + s * d + bend * std::sin(kPi * s) * nrm;
  }
  x.front() = p;
  x.back() = q;
  return x;
}

} // namespace

double path_action(const Potential &pot, const Path1D &path) {
  path.validate();
  return action(pot, path.samples);
}

DistanceResult degenerate_distance(const Potential &pot, const Vec2 &p, const Vec2 &q,
                                   const DistanceOptions &opt) {
  if (!p.allFinite() || !q.allFinite()) throw DomainError("degenerate_distance: non-finite point");
  DistanceResult best;
  if ((p - q).norm() < 1e-14) {
    best.path = Path1D(0.0, 1.0, {p, p});
    best.value = 0.0;
    return best;
  }
  static const double bends[] = {0.0, 0.25, -0.25, 0.5, -0.5, 0.75, -0.75};
  const int starts = std::clamp(opt.multistart, 1, 7);
  best.value = INFINITY;
  best.converged = false;
  for (int s = 0; s < starts; ++s) {
    std::size_t n = std::min(opt.n_coarse, opt.n);
    if (n < 3) n = 3;
    std::vector<Vec2> x = initial_path(p, q, n, bends[s]);
    LevelResult lr{};
    int iters = 0;
    for (;;) {
      const bool last = n >= opt.n;
      lr = relax(pot, x, opt.max_iters, last ? opt.tol_grad : opt.tol_coarse);
      iters += lr.iterations;
      if (last) break;
      x = refine(lr.x);
      n = x.size();
      if (n > opt.n) {
        x = reparametrize(x, opt.n);
        n = opt.n;
      }
    }
    best.start_values.push_back(lr.value);
    // prefer converged starts; among those the least action
    const bool better = (lr.converged && !best.converged) ||
                        (lr.converged == best.converged && lr.value < best.value);
    if (better) {
      best.value = lr.value;
      best.converged = lr.converged;
      best.residual = lr.residual;
      best.start_index = s;
      double L = 0;
      for (std::size_t k = 0; k + 1 < lr.x.size(); ++k) L += (lr.x[k + 1] - lr.x[k]).norm();
      best.path = Path1D(0.0, L > 0 ? L : 1.0, lr.x);
      best.path.samples.front() = p;
      best.path.samples.back() = q;
    }
    best.iterations += iters;
  }
  return best;
}

double dQ_distance(const Vec2 &ev, const Mat2 &evec, const Vec2 &x) {
  if (!(ev(0) > 0.0) || !(ev(1) > 0.0)) throw DomainError("dQ_distance: eigenvalues must be positive");
  const Vec2 c = evec.transpose() * x;
  return 0.5 * (std::sqrt(ev(0)) * c(0) * c(0) + std::sqrt(ev(1)) * c(1) * c(1));
}

WellDistances3 well_distances(const Potential &pot, const DistanceOptions &opt) {
  if (pot.well_count() != 3) throw PreconditionError("well_distances: need three wells");
  WellDistances3 r;
  r.r12 = degenerate_distance(pot, pot.well(1).position, pot.well(2).position, opt);
  r.r23 = degenerate_distance(pot, pot.well(2).position, pot.well(3).position, opt);
  r.r13 = degenerate_distance(pot, pot.well(1).position, pot.well(3).position, opt);
  r.d12 = r.r12.value;
  r.d23 = r.r23.value;
  r.d13 = r.r13.value;
  return r;
}

double triangle_defect(const Potential &pot, const DistanceOptions &opt) {
  const auto r = well_distances(pot, opt);
  if (!r.r12.converged || !r.r23.converged || !r.r13.converged)
    throw ConvergenceError("triangle_defect: distance solve did not converge");
  return r.d12 + r.d23 - r.d13;
}

double convexity_radius(const Potential &pot, const Well &well) {
  double r0 = 1.0;
  for (const auto &o : pot.wells())
    if ((o.position - well.position).norm() > 0) r0 = std::min(r0, 0.5 * (o.position - well.position).norm());
  for (double r = r0; r > 1e-6; r *= 0.5) {
    bool ok = true;
    for (int i = 1; i <= 16 && ok; ++i)
      for (int j = 0; j < 32 && ok; ++j) {
        const double rr = r * i / 16.0, th = 2 * kPi * j / 32.0;
        const Vec2 u = well.position + rr * Vec2(std::cos(th), std::sin(th));
        const Mat2 H = pot.derivatives(u).hess;
        ok = Eigen::SelfAdjointEigenSolver<Mat2>(H, Eigen::EigenvaluesOnly).eigenvalues()(0) > 0;
      }
    if (ok) return r;
  }
  return 0.0;
}

double convexity_radius_metric(const Potential &pot, const Well &well, const DistanceOptions &opt) {
  const double r = convexity_radius(pot, well);
  double m = INFINITY;
  for (int j = 0; j < 32; ++j) {
    const double th = 2 * kPi * j / 32.0;
    m = std::min(m, degenerate_distance(pot, well.position,
                                        well.position + r * Vec2(std::cos(th), std::sin(th)), opt)
                        .value);
  }
  return m;
}

double default_eta(const Potential &pot) {
  double m = INFINITY;
  const DistanceOptions opt{33, 9, 1, 100, 1e-12, 1e-9};
  for (const auto &w : pot.wells()) m = std::min(m, convexity_radius_metric(pot, w, opt));
  return m / 5.0;
}

Path1D geodesic_gradient_flow(const Potential &pot, const Vec2 &start, const Well &well, double T,
                              const FlowOptions &opt) {
  const Vec2 p = well.position;
  const double eta = opt.eta > 0 ? opt.eta : convexity_radius_metric(pot, well, opt.distance);
  if (degenerate_distance(pot, p, start, opt.distance).value > eta)
    throw PreconditionError("geodesic_gradient_flow: start outside the convexity radius");
  const int steps = std::max(1, int(std::ceil(T / opt.dt)));
  const double dt = T / steps;
  auto grad = [&](const Vec2 &x) -> Vec2 {
    const double r = (x - p).norm();
    if (r < 1e-12) return Vec2::Zero();
    const double hs = std::min(opt.fd_step, 1e-2 * r);
    Vec2 g;
    for (int i = 0; i < 2; ++i) {
      Vec2 e = Vec2::Zero();
      e(i) = hs;
      g(i) = (degenerate_distance(pot, p, x + e, opt.distance).value -
              degenerate_distance(pot, p, x - e, opt.distance).value) /
             (2 * hs);
    }
    return g;
  };
  std::vector<Vec2> xs{start};
  Vec2 x = start;
  for (int s = 0; s < steps; ++s) {
    const Vec2 k1 = -grad(x);
    const Vec2 k2 = -grad(x + 0.5 * dt * k1);
    const Vec2 k3 = -grad(x + 0.5 * dt * k2);
    const Vec2 k4 = -grad(x + dt * k3);
    x += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    xs.push_back(x);
  }
  return Path1D(0.0, steps * dt, std::move(xs));
}

WellTable::WellTable(const Potential &pot, const Well &well, double r_max, int n_angle,
                     int n_radius, const DistanceOptions &opt)
    : p_(well.position), r_max_(r_max), na_(n_angle), nr_(n_radius) {
  q_.assign(std::size_t((nr_ + 1) * na_), 0.0);
  for (int i = 0; i < na_; ++i) {
    const double th = 2 * kPi * i / na_;
    const Vec2 dir(std::cos(th), std::sin(th));
    q_[std::size_t(i)] = dQ_distance(well.eigenvalues, well.eigenvectors, dir);
    for (int j = 1; j <= nr_; ++j) {
      const double r = r_max_ * j / nr_;
      q_[std::size_t(j * na_ + i)] = degenerate_distance(pot, p_, p_ + r * dir, opt).value / (r * r);
    }
  }
}

double WellTable::operator()(const Vec2 &x) const {
  const Vec2 d = x - p_;
  const double r = d.norm();
  if (r == 0.0) return 0.0;
  double th = std::atan2(d(1), d(0));
  if (th < 0) th += 2 * kPi;
  const double a = th / (2 * kPi) * na_;
  int i0 = int(std::floor(a));
  const double wa = a - i0;
  i0 %= na_;
  const int i1 = (i0 + 1) % na_;
  const double b = std::min(r / r_max_, 1.0) * nr_;
  int j0 = std::min(int(std::floor(b)), nr_ - 1);
  const double wb = b - j0;
  auto Q = [&](int j, int i) { return q_[std::size_t(j * na_ + i)]; };
  const double q = (1 - wb) * ((1 - wa) * Q(j0, i0) + wa * Q(j0, i1)) +
                   wb * ((1 - wa) * Q(j0 + 1, i0) + wa * Q(j0 + 1, i1));
  return q * r * r;
}

DistanceOracle::DistanceOracle(const Potential &pot, double eta) : eta_(eta) {
  for (const auto &w : pot.wells()) {
    // table must reach comfortably past 4η along the slow direction
    double r = std::sqrt(12.0 * eta / std::sqrt(w.lambda1()));
    r = std::min(r, 0.45 * [&] {
      double m = INFINITY;
      for (const auto &o : pot.wells())
        if (&o != &w) m = std::min(m, (o.position - w.position).norm());
      return std::isfinite(m) ? m : 2.0;
    }());
    tables_.emplace_back(pot, w, r);
  }
}

std::pair<int, double> DistanceOracle::nearest(const Vec2 &x) const {
  int best = 0;
  double bd = INFINITY;
  for (std::size_t i = 0; i < tables_.size(); ++i) {
    const double d = tables_[i](x);
    if (d < bd) {
      bd = d;
      best = int(i) + 1;
    }
  }
  return {best, bd};
}

} // namespace triwell::metric
