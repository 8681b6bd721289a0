#include "triwell/disk2d.hpp"

#include <algorithm>
#include <cmath>

namespace triwell::disk {

namespace {
Vec2 on_circle(double R, double th) { return Vec2(R * std::cos(th), R * std::sin(th)); }

Path1D restriction(const BoundaryTrace &trace, double h, bool upper) {
  const double R = trace.R, half = 0.5 * M_PI * R;
  const std::size_t n = std::size_t(std::lround(2 * half / h)) + 1;
  if (n < 3) throw DomainError("boundary restriction needs h < πR/2");
  Path1D p;
  p.t_start = -half;
  p.t_end = half;
  p.samples.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double tau = p.t(k);
    p.samples[k] = trace.at(upper ? 0.5 * M_PI - tau / R : tau / R - 0.5 * M_PI);
  }
  return p;
}
} // namespace

double AngleSet::L1() const { return (on_circle(R, a21) - on_circle(R, b12)).norm(); }
double AngleSet::L3() const { return (on_circle(R, a32) - on_circle(R, b23)).norm(); }

double AngleSet::ell() const {
  return 0.5 * R * std::min({a21 - abar, abar - a32, b23 - bbar, bbar - b12});
}

double AngleSet::eps() const {
  const double h = 0.5 * M_PI;
  return std::max({std::abs(a21 - h), std::abs(a32 - h), std::abs(abar - h), std::abs(b12 + h),
                   std::abs(b23 + h), std::abs(bbar + h)});
}

bool AngleSet::ordered() const {
  return M_PI > a21 && a21 > abar && abar > a32 && a32 > 0 && 0 > b23 && b23 > bbar &&
         bbar > b12 && b12 > -M_PI;
}

Path1D upper_restriction(const BoundaryTrace &trace, double h) { return restriction(trace, h, true); }
Path1D lower_restriction(const BoundaryTrace &trace, double h) { return restriction(trace, h, false); }

AngleReport boundary_angles(const Potential &pot, const BoundaryTrace &trace,
                            const metric::DistanceOracle &oracle, double gamma,
                            const hetero::HeteroclinicProfile &z12,
                            const hetero::HeteroclinicProfile &z23, double h) {
  const double R = trace.R, eta = oracle.eta();
  const Path1D up = upper_restriction(trace, h), lo = lower_restriction(trace, h);
  AngleReport rep;
  rep.boundary_energy = energy_1d(pot, up) + energy_1d(pot, lo);
  const double d13 = z12.connection_energy + z23.connection_energy;
  if (rep.boundary_energy > 2 * d13 + gamma)
    throw PreconditionError("boundary energy " + std::to_string(rep.boundary_energy) +
                            " exceeds 2·d13 + γ = " + std::to_string(2 * d13 + gamma));
  // far arcs must already sit at the outer wells
  for (std::size_t k = 0; k < trace.samples.size(); ++k) {
    const double th = -M_PI + 2 * M_PI * double(k) / double(trace.samples.size());
    const double c = std::cos(th);
    if (c < -0.5 && oracle.distance(1, trace.samples[k]) > eta)
      throw PreconditionError("trace leaves the η-ball of p1 on the arc x < -R/2");
    if (c > 0.5 && oracle.distance(3, trace.samples[k]) > eta)
      throw PreconditionError("trace leaves the η-ball of p3 on the arc x > R/2");
  }
  rep.upper = structure::locate_split(pot, up, oracle, z12, z23);
  rep.lower = structure::locate_split(pot, lo, oracle, z12, z23);
  AngleSet &A = rep.angles;
  A.R = R;
  A.a21 = 0.5 * M_PI - rep.upper.a / R;
  A.a32 = 0.5 * M_PI - rep.upper.b / R;
  A.abar = 0.5 * M_PI - rep.upper.T / R;
  A.b12 = -0.5 * M_PI + rep.lower.a / R;
  A.b23 = -0.5 * M_PI + rep.lower.b / R;
  A.bbar = -0.5 * M_PI + rep.lower.T / R;
  if (!A.ordered()) throw StructureError("boundary angles are not ordered around the circle");
  const double ell = A.ell();
  for (std::size_t k = 0; k < up.size(); ++k) {
    const double t = up.t(k);
    if (t < rep.upper.a - ell) rep.max_dist_p1 = std::max(rep.max_dist_p1, oracle.distance(1, up[k]));
    if (t > rep.upper.b + ell) rep.max_dist_p3 = std::max(rep.max_dist_p3, oracle.distance(3, up[k]));
  }
  for (std::size_t k = 0; k < lo.size(); ++k) {
    const double t = lo.t(k);
    if (t < rep.lower.a - ell) rep.max_dist_p1 = std::max(rep.max_dist_p1, oracle.distance(1, lo[k]));
    if (t > rep.lower.b + ell) rep.max_dist_p3 = std::max(rep.max_dist_p3, oracle.distance(3, lo[k]));
  }
  return rep;
}

BoundaryTrace synthetic_trace(const hetero::HeteroclinicProfile &z12,
                              const hetero::HeteroclinicProfile &z23, double R, double a21,
                              double a32, double b12, double b23, double ell, std::size_t M) {
  const double abar = 0.5 * (a21 + a32), bbar = 0.5 * (b12 + b23);
  return BoundaryTrace::from_function(R, M, [&](double th) -> Vec2 {
    if (th >= 0) {
      if (th >= abar) return z12.truncated(-R * (th - a21), ell);
      return z23.truncated(-R * (th - a32), ell);
    }
    if (th <= bbar) return z12.truncated(R * (th - b12), ell);
    return z23.truncated(R * (th - b23), ell);
  });
}

} // namespace triwell::disk
