#include "triwell/potential.hpp"
#include "triwell/metric.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace triwell {

namespace {

template <typename S> WDerivs<S> degenerate_triple_eval(S lam, S mu, const Vec2T<S> &u) {
  using std::pow;
  const S x = u(0), y = u(1);
  const S x2 = x * x, x4 = x2 * x2;
  const S q = x2 * (x2 - 1) * (x2 - 1);
  const S dq = 6 * x4 * x - 8 * x2 * x + 2 * x;
  const S ddq = 30 * x4 - 24 * x2 + 2;
  const S a = lam + mu * x2;
  WDerivs<S> r;
  r.W = q + a * y * y;
  r.grad << dq + 2 * mu * x * y * y, 2 * a * y;
  r.hess << ddq + 2 * mu * y * y, 4 * mu * x * y, 4 * mu * x * y, 2 * a;
  return r;
}

template <typename S> WDerivs<S> double_well_eval(const Vec2T<S> &u) {
  const S x = u(0), y = u(1);
  const S s = 1 - x * x;
  WDerivs<S> r;
  r.W = S(0.5) * s * s + y * y;
  r.grad << -2 * x * s, 2 * y;
  r.hess << 6 * x * x - 2, 0, 0, 2;
  return r;
}

template <typename S>
WDerivs<S> product_eval(S c, const std::array<Vec2T<S>, 3> &p, const Vec2T<S> &u) {
  std::array<S, 3> A;
  std::array<Vec2T<S>, 3> g;
  for (int i = 0; i < 3; ++i) {
    const Vec2T<S> d = u - p[i];
    A[i] = d.squaredNorm();
    g[i] = 2 * d;
  }
  WDerivs<S> r;
  r.W = c * A[0] * A[1] * A[2];
  r.grad = c * (g[0] * A[1] * A[2] + A[0] * g[1] * A[2] + A[0] * A[1] * g[2]);
  const Mat2T<S> I = Mat2T<S>::Identity();
  Mat2T<S> H = 2 * I * (A[1] * A[2] + A[0] * A[2] + A[0] * A[1]);
  H += (g[0] * g[1].transpose() + g[1] * g[0].transpose()) * A[2];
  H += (g[0] * g[2].transpose() + g[2] * g[0].transpose()) * A[1];
  H += (g[1] * g[2].transpose() + g[2] * g[1].transpose()) * A[0];
  r.hess = c * H;
  return r;
}

template <typename S> WDerivs<S> quadratic_eval(const Mat2T<S> &Q, const Vec2T<S> &u) {
  WDerivs<S> r;
  r.W = S(0.5) * u.dot(Q * u);
  r.grad = Q * u;
  r.hess = Q;
  return r;
}

Well make_well(const Potential &pot, std::string label, const Vec2 &p) {
  Well w;
  w.label = std::move(label);
  w.position = p;
  const auto d = pot.derivatives(p);
  Eigen::SelfAdjointEigenSolver<Mat2> es(d.hess);
  w.eigenvalues = es.eigenvalues();
  w.eigenvectors = es.eigenvectors();
  // sign convention: first non-negligible component positive
  for (int c = 0; c < 2; ++c) {
    Vec2 v = w.eigenvectors.col(c);
    const int k = std::abs(v(0)) > 1e-12 ? 0 : 1;
    if (v(k) < 0) w.eigenvectors.col(c) = -v;
  }
  return w;
}

Vec2T<quad> to_quad(const Vec2 &v) { return {quad(v(0)), quad(v(1))}; }

} // namespace

Potential::Potential(std::string family, Evaluator f, const std::vector<Vec2> &wells,
                     double coercivity_radius, std::map<std::string, double> params,
                     QuadEvaluator fq)
    : family_(std::move(family)), f_(std::move(f)), fq_(std::move(fq)), M_(coercivity_radius),
      params_(std::move(params)) {
  for (std::size_t i = 0; i < wells.size(); ++i)
    wells_.push_back(make_well(*this, "p" + std::to_string(i + 1), wells[i]));
}

WDerivs<quad> Potential::derivatives(const Vec2T<quad> &u) const {
  if (!fq_) throw DomainError("potential '" + family_ + "' has no quad-precision evaluator");
  return fq_(u);
}

const Well &Potential::well(int label) const {
  if (label < 1 || std::size_t(label) > wells_.size())
    throw DomainError("no well p" + std::to_string(label));
  return wells_[std::size_t(label - 1)];
}

WDerivatives w_derivatives(const Potential &pot, const Vec2 &u) {
  if (!u.allFinite()) throw DomainError("w_derivatives: non-finite point");
  return pot.derivatives(u);
}

Potential degenerate_triple_family(double lambda, double mu) {
  auto f = [lambda, mu](const Vec2 &u) { return degenerate_triple_eval<double>(lambda, mu, u); };
  auto fq = [lam = quad(lambda), m = quad(mu)](const Vec2T<quad> &u) {
    return degenerate_triple_eval<quad>(lam, m, u);
  };
  return Potential("degenerate_triple", f, {Vec2(-1, 0), Vec2(0, 0), Vec2(1, 0)}, 3.0,
                   {{"lambda", lambda}, {"mu", mu}}, fq);
}

Potential builtin_degenerate_triple(double lambda, double mu) {
  if (!(lambda > 1.0))
    throw ConfigurationError(
        "degenerate_triple: lambda must exceed 1 so that the well axis is the slow direction "
        "at p2 (D²W(p2) = diag(2, 2λ) needs distinct eigenvalues with 2 the smaller)");
  if (mu < 0.0) throw ConfigurationError("degenerate_triple: mu must be nonnegative");
  if (std::abs(2.0 * (lambda + mu) - 8.0) < 1e-12)
    throw ConfigurationError(
        "degenerate_triple: 2(lambda+mu) = 8 gives a repeated Hessian eigenvalue at p1, p3");
  return degenerate_triple_family(lambda, mu);
}

Potential builtin_double_well() {
  return Potential(
      "double_well", [](const Vec2 &u) { return double_well_eval<double>(u); },
      {Vec2(-1, 0), Vec2(1, 0)}, 2.0, {},
      [](const Vec2T<quad> &u) { return double_well_eval<quad>(u); });
}

Potential triangle_potential(double c) {
  const double s = std::sqrt(3.0) / 2.0;
  const std::array<Vec2, 3> p{Vec2(-s, -0.5), Vec2(0, 1), Vec2(s, -0.5)};
  const std::array<Vec2T<quad>, 3> pq{to_quad(p[0]), to_quad(p[1]), to_quad(p[2])};
  return Potential(
      "triangle", [c, p](const Vec2 &u) { return product_eval<double>(c, p, u); },
      {p[0], p[1], p[2]}, 3.0, {{"c", c}},
      [cq = quad(c), pq](const Vec2T<quad> &u) { return product_eval<quad>(cq, pq, u); });
}

Potential quadratic_potential(double l1, double l2, double angle) {
  Mat2 V;
  V << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  const Mat2 Q = V * Vec2(l1, l2).asDiagonal() * V.transpose();
  Mat2T<quad> Qq;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) Qq(i, j) = quad(Q(i, j));
  return Potential(
      "quadratic", [Q](const Vec2 &u) { return quadratic_eval<double>(Q, u); }, {Vec2(0, 0)},
      1.0, {{"l1", l1}, {"l2", l2}, {"angle", angle}},
      [Qq](const Vec2T<quad> &u) { return quadratic_eval<quad>(Qq, u); });
}

Potential make_builtin(const std::string &family, const std::map<std::string, double> &params) {
  auto get = [&](const char *k, double dflt) {
    auto it = params.find(k);
    return it == params.end() ? dflt : it->second;
  };
  if (family == "degenerate_triple")
    return builtin_degenerate_triple(get("lambda", 2.0), get("mu", 1.0));
  if (family == "double_well") return builtin_double_well();
  if (family == "triangle") return triangle_potential(get("c", 1.0));
  if (family == "quadratic")
    return quadratic_potential(get("l1", 1.0), get("l2", 4.0), get("angle", 0.0));
  throw ConfigurationError("unknown potential family '" + family + "'");
}

ValidationReport validate_potential(const Potential &pot, const ValidationOptions &opt) {
  for (const auto &w : pot.wells())
    if (!w.position.allFinite()) throw DomainError("validate_potential: non-finite well");

  ValidationReport rep;
  const double M = pot.coercivity_radius();

  // (posdef)
  rep.posdef = pot.well_count() == 3;
  for (const auto &w : pot.wells()) {
    const auto d = pot.derivatives(w.position);
    rep.eigenvalues.push_back(w.eigenvalues);
    const bool ok = std::abs(d.W) < opt.tol_well && d.grad.lpNorm<Eigen::Infinity>() < opt.tol_well &&
                    w.lambda1() > 0 && w.lambda2() - w.lambda1() > opt.tol_gap;
    if (!ok) {
      rep.posdef = false;
      std::ostringstream os;
      os << "posdef fails at " << w.label << ": eigenvalues (" << w.lambda1() << ", "
         << w.lambda2() << ")";
      rep.notes.push_back(os.str());
    }
  }

  // sampled nonnegativity and zero set on [-M, M]²
  {
    const int n = opt.grid_n;
    const double step = 2.0 * M / double(n - 1);
    const double nb = 2.0 * step;
    rep.nonnegative = true;
    rep.zero_set = true;
    rep.min_sampled_W = INFINITY;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Vec2 u(-M + i * step, -M + j * step);
        const double W = pot.W(u);
        rep.min_sampled_W = std::min(rep.min_sampled_W, W);
        if (W < 0) rep.nonnegative = false;
        if (W < opt.tol_zero) {
          bool near = false;
          for (const auto &w : pot.wells()) near = near || (u - w.position).norm() < nb;
          if (!near) rep.zero_set = false;
        }
      }
  }

  // (Winfin) on |p| = M
  {
    rep.min_radial_derivative = INFINITY;
    for (int k = 0; k < opt.circle_samples; ++k) {
      const double th = 2.0 * std::numbers::pi * k / opt.circle_samples;
      const Vec2 u = M * Vec2(std::cos(th), std::sin(th));
      rep.min_radial_derivative = std::min(rep.min_radial_derivative, u.dot(pot.derivatives(u).grad));
    }
    rep.winfin = rep.min_radial_derivative >= 0;
  }

  if (pot.well_count() != 3) {
    rep.notes.push_back("not a three-well potential; metric checks skipped");
    return rep;
  }

  const auto wd = metric::well_distances(pot);
  rep.d12 = wd.d12;
  rep.d23 = wd.d23;
  rep.d13 = wd.d13;
  rep.defect = wd.d12 + wd.d23 - wd.d13;
  if (!wd.r12.converged || !wd.r23.converged || !wd.r13.converged) {
    rep.inconclusive = true;
    rep.notes.push_back("distance solver did not converge; metric flags inconclusive");
  }
  rep.degenerate = std::abs(rep.defect) < opt.tol_defect;

  const Vec2 p2 = pot.well(2).position;
  const auto &path = wd.r13.path;
  double gap = INFINITY;
  std::size_t kmin = 0;
  for (std::size_t k = 0; k < path.size(); ++k) {
    const double g = (path[k] - p2).norm();
    if (g < gap) {
      gap = g;
      kmin = k;
    }
  }
  rep.p2_path_gap = gap;
  rep.geodesic_through_p2 = gap < opt.tol_path;

  // (p2generic): the 13-geodesic leaves p2 along the slow eigendirection
  if (rep.geodesic_through_p2 && kmin > 0 && kmin + 1 < path.size()) {
    const Vec2 e = pot.well(2).slow_direction();
    const Vec2 tin = (path[kmin] - path[kmin - 1]).normalized();
    const Vec2 tout = (path[kmin + 1] - path[kmin]).normalized();
    const double c = std::min(std::abs(tin.dot(e)), std::abs(tout.dot(e)));
    rep.p2generic = c > std::cos(opt.alignment_deg * std::numbers::pi / 180.0);
  }
  return rep;
}

} // namespace triwell
