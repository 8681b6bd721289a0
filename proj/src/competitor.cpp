#include "triwell/disk2d.hpp"

#include <algorithm>
#include <cmath>

namespace triwell::disk {

namespace {

Vec2 on_circle(double R, double th) { return Vec2(R * std::cos(th), R * std::sin(th)); }

// Chord frame: origin at the chord midpoint, u along the chord (towards the
// upper endpoint), n its right normal.
struct Chord {
  Vec2 mid, u, n;
  double m = 0; // mid·n (the midpoint is the foot of the perpendicular from 0)
  Chord(const Vec2 &top, const Vec2 &bottom) {
    mid = 0.5 * (top + bottom);
    u = (top - bottom).normalized();
    n = Vec2(u(1), -u(0));
    m = mid.dot(n);
  }
  double xp(const Vec2 &X) const { return (X - mid).dot(n); }
  double yp(const Vec2 &X) const { return (X - mid).dot(u); }
  // largest half-height such that the strip xp ∈ [lo, hi] stays in B_r
  double half_height(double r, double lo, double hi) const {
    const double w = std::max((m + lo) * (m + lo), (m + hi) * (m + hi));
    return w < r * r ? std::sqrt(r * r - w) : 0.0;
  }
};

} // namespace

Field2D build_competitor(const Potential &pot, const BoundaryTrace &trace, const AngleSet &A,
                         const hetero::HeteroclinicProfile &z12,
                         const hetero::HeteroclinicProfile &z23, double h,
                         const CompetitorParams &par) {
  const double R = trace.R, ell = par.ell, rho = par.rho, sigma = par.sigma;
  if (!A.ordered()) throw StructureError("angle set is not ordered");
  if (std::abs(A.R - R) > 1e-9 * R) throw ConfigurationError("angle set radius differs from the trace");
  if (!(ell > 0) || !(rho >= 0) || !(sigma > 0)) throw ConfigurationError("competitor needs ℓ > 0, ρ >= 0, σ > 0");
  if (sigma < par.C || rho > R / par.C)
    throw ConfigurationError("competitor needs C <= σ and ρ <= R/C");
  if (A.eps() > par.eps_max)
    throw ConfigurationError("boundary angles deviate by " + std::to_string(A.eps()) +
                             " > " + std::to_string(par.eps_max));
  if (R < 2) throw ConfigurationError("competitor needs R >= 2");
  (void)pot;

  const Chord S12(on_circle(R, A.a21), on_circle(R, A.b12));
  const Chord S23(on_circle(R, A.a32), on_circle(R, A.b23));
  const Vec2 P = on_circle(R, A.abar), Q = on_circle(R, A.bbar);
  const Vec2 uL = (P - Q).normalized(), nL(uL(1), -uL(0));
  if (std::min(S12.xp(P), S12.xp(Q)) < ell || std::max(S23.xp(P), S23.xp(Q)) > -ell)
    throw ConfigurationError("ℓ = " + std::to_string(ell) + " exceeds the distance from the walls to L");

  const double y1 = S12.half_height(R - 1, -ell - 2 * rho, ell);
  const double y3 = S23.half_height(R - 1, -ell, ell + 2 * rho);
  auto ramp = [&](double yhat, double yp) {
    return rho * std::clamp((yhat - std::abs(yp)) / sigma, 0.0, 1.0);
  };
  auto inner = [&](const Vec2 &X) -> Vec2 {
    if ((X - Q).dot(nL) < 0) {
      const double tau = ramp(y1, S12.yp(X));
      return z12.truncated(S12.xp(X) + tau, ell + tau);
    }
    const double tau = ramp(y3, S23.yp(X));
    return z23.truncated(S23.xp(X) - tau, ell + tau);
  };

  Field2D f = Field2D::make(R, h, trace);
  f.fill([&](double x, double y) -> Vec2 {
    const Vec2 X(x, y);
    const double r = X.norm();
    if (r < R - 1) return inner(X);
    const double th = std::atan2(y, x);
    const double w = std::clamp(r - (R - 1), 0.0, 1.0);
    return (1 - w) * inner(on_circle(R - 1, th)) + w * trace.at(th);
  });
  return f;
}

double upper_bound_formula(const AngleSet &A, double ell, double rho, double sigma, double eta,
                           double gamma, const BoundConstants &k, double d12, double d23) {
  if (!(sigma > 0) || !(rho > 0)) throw DomainError("bound needs ρ, σ > 0");
  const double e = std::exp(-k.c * ell);
  const double tail = rho * rho / sigma + sigma / rho * e + A.R * std::exp(-k.c * (ell + rho)) +
                      eta * ell * e + e + gamma + eta * eta;
  return d12 * A.L1() + d23 * A.L3() + k.C * tail;
}

} // namespace triwell::disk
