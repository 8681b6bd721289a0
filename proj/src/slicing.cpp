#include "triwell/disk2d.hpp"

#include <algorithm>
#include <cmath>

namespace triwell::disk {

namespace {
Vec2 on_circle(double R, double th) { return Vec2(R * std::cos(th), R * std::sin(th)); }
}

double SliceFunction::operator()(const Vec2 &x) const {
  const double z1 = x.dot(u1) - l1;
  if (single) return z1;
  return std::max(z1, x.dot(u3) - l3);
}

double SliceFunction::range_max() const { return single ? R - l1 : std::max(R - l1, R - l3); }

double SliceFunction::range_min() const {
  // convex and unbounded below along -(u1+u3): the minimum sits on the circle
  const int n = 8192;
  double best = INFINITY, th_best = 0;
  for (int k = 0; k < n; ++k) {
    const double th = 2 * M_PI * k / n;
    const double v = (*this)(on_circle(R, th));
    if (v < best) {
      best = v;
      th_best = th;
    }
  }
  double lo = th_best - 2 * M_PI / n, hi = th_best + 2 * M_PI / n;
  for (int it = 0; it < 60; ++it) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if ((*this)(on_circle(R, m1)) < (*this)(on_circle(R, m2))) hi = m2;
    else lo = m1;
  }
  return std::min(best, (*this)(on_circle(R, 0.5 * (lo + hi))));
}

SliceFunction slice_function(const AngleSet &A) {
  if (!A.ordered()) throw StructureError("angle set is not ordered");
  SliceFunction z;
  z.R = A.R;
  z.a1 = on_circle(A.R, A.a21);
  z.b1 = on_circle(A.R, A.b12);
  z.a3 = on_circle(A.R, A.a32);
  z.b3 = on_circle(A.R, A.b23);
  z.u1 = (z.a1 - z.b1).normalized();
  z.u3 = (z.a3 - z.b3).normalized();
  const Vec2 w = z.u1 - z.u3;
  if (w.norm() < 1e-12) {
    z.single = true;
    z.l1 = z.l3 = 0;
    return z;
  }
  // ζ1 - ζ3 = x·w - Δ must be >= 0 on S12 and <= 0 on S23
  const double lo = std::max(z.a3.dot(w), z.b3.dot(w));
  const double hi = std::min(z.a1.dot(w), z.b1.dot(w));
  if (lo > hi) throw StructureError("no slice function separates the two walls");
  const double D = std::clamp(0.0, lo, hi);
  z.l1 = 0.5 * D;
  z.l3 = -0.5 * D;
  return z;
}

namespace {

// {x·u = c} ∩ B_R ∩ {x·v - k <= 0}; empty when the chord misses.
std::optional<std::pair<Vec2, Vec2>> clipped_chord(double R, const Vec2 &u, double c,
                                                   const Vec2 *v, double k) {
  if (std::abs(c) > R) return std::nullopt;
  const Vec2 foot = c * u, dir(-u(1), u(0));
  const double s = std::sqrt(R * R - c * c);
  double lo = -s, hi = s;
  if (v) {
    const double g0 = foot.dot(*v) - k, g1 = dir.dot(*v);
    if (std::abs(g1) < 1e-300) {
      if (g0 > 0) return std::nullopt;
    } else if (g1 > 0) {
      hi = std::min(hi, -g0 / g1);
    } else {
      lo = std::max(lo, -g0 / g1);
    }
  }
  if (hi < lo) return std::nullopt;
  return std::make_pair(Vec2(foot + lo * dir), Vec2(foot + hi * dir));
}

double pair_distance(int i, int j, double d12, double d23) {
  if (i == j) return 0;
  return i + j == 3 ? d12 : i + j == 5 ? d23 : d12 + d23;
}

char classify(const SliceFunction &z, double t) {
  const bool in1 = t >= z(z.b1) && t <= z(z.a1);
  const bool in3 = t >= z(z.b3) && t <= z(z.a3);
  return in1 && in3 ? 'c' : in1 ? 'a' : in3 ? 'b' : 'd';
}

} // namespace

LevelSet extract_level_set(const SliceFunction &z, double t) {
  LevelSet ls;
  ls.slice_case = classify(z, t);
  if (z.single) {
    if (auto c = clipped_chord(z.R, z.u1, t + z.l1, nullptr, 0))
      ls.polylines.push_back({c->first, c->second});
    return ls;
  }
  auto c1 = clipped_chord(z.R, z.u1, t + z.l1, &z.u3, t + z.l3);
  auto c3 = clipped_chord(z.R, z.u3, t + z.l3, &z.u1, t + z.l1);
  const double tol = 1e-9 * std::max(1.0, z.R);
  if (c1 && c3) {
    // try to join at the ridge point
    const Vec2 ends1[2] = {c1->first, c1->second}, ends3[2] = {c3->first, c3->second};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        if ((ends1[a] - ends3[b]).norm() < tol) {
          ls.polylines.push_back({ends1[1 - a], ends1[a], ends3[1 - b]});
          return ls;
        }
  }
  if (c1) ls.polylines.push_back({c1->first, c1->second});
  if (c3) ls.polylines.push_back({c3->first, c3->second});
  return ls;
}

SliceBound slice_lower_bound(const Potential &pot, const Field2D &field, const SliceFunction &z,
                             const metric::DistanceOracle &oracle, const AngleSet &A, double R0,
                             int n_slices, double d12, double d23, const SliceConstants &k) {
  field.validate();
  if (n_slices < 2) throw DomainError("need at least two slices");
  const double R = field.R, h = field.h, eta = oracle.eta(), d13 = d12 + d23;
  const double t0 = z.range_min(), t1 = z.range_max(), dt = (t1 - t0) / n_slices;
  const double anchors[4] = {z(z.a1), z(z.b1), z(z.a3), z(z.b3)};
  const double scale = A.eps() + 1 / std::sqrt(R);
  SliceBound out;
  for (int s = 0; s <= n_slices; ++s) {
    SliceRow row;
    row.t = t0 + s * dt;
    const LevelSet ls = extract_level_set(z, row.t);
    row.slice_case = ls.slice_case;
    bool hit1 = false, hit3 = false;
    double joined = 0; // wells the slice actually connects, endpoint to endpoint
    for (const auto &pl : ls.polylines) {
      joined += pair_distance(oracle.nearest(field.sample(pl.front())).first,
                              oracle.nearest(field.sample(pl.back())).first, d12, d23);
      std::vector<Vec2> vals;
      std::vector<double> ds;
      for (std::size_t q = 0; q + 1 < pl.size(); ++q) {
        const Vec2 a = pl[q], b = pl[q + 1];
        const double len = (b - a).norm();
        const int m = std::max(1, int(std::ceil(len / h)));
        for (int r = (q == 0 ? 0 : 1); r <= m; ++r) {
          const Vec2 X = a + (b - a) * (double(r) / m);
          const Vec2 v = field.sample(X);
          vals.push_back(v);
          if (X.norm() <= R0) {
            hit1 = hit1 || oracle.distance(1, v) < eta;
            hit3 = hit3 || oracle.distance(3, v) < eta;
          }
          if (r > 0) ds.push_back(len / m);
        }
      }
      for (std::size_t q = 0; q + 1 < vals.size(); ++q) {
        const double d = ds[q];
        if (d <= 0) continue;
        row.energy += 0.5 * (vals[q + 1] - vals[q]).squaredNorm() / d +
                      0.5 * d * (pot.W(vals[q]) + pot.W(vals[q + 1]));
      }
    }
    row.delta = INFINITY;
    for (double a : anchors) row.delta = std::min(row.delta, std::abs(row.t - a));
    const double pair = std::min(joined, row.slice_case == 'a'   ? d12
                                         : row.slice_case == 'b' ? d23
                                         : row.slice_case == 'c' ? d13
                                                                 : 0.0);
    const double corr = std::exp(-k.c_slice * std::min(std::sqrt(R), row.delta / scale));
    row.bound = pair > 0 ? std::max(0.0, pair - corr) : 0.0;
    row.in_T = hit1 && hit3;
    if (row.in_T)
      row.bound = std::max(row.bound, d13 + k.c_final * std::exp(-k.C_final * R0) -
                                          k.C_tail * std::exp(-k.c_tail * R));
    out.rows.push_back(row);
  }
  for (int s = 0; s <= n_slices; ++s) {
    const double w = (s == 0 || s == n_slices) ? 0.5 * dt : dt;
    out.total_bound += w * out.rows[std::size_t(s)].bound;
    out.measured_integral += w * out.rows[std::size_t(s)].energy;
    if (out.rows[std::size_t(s)].in_T) out.covered_T += w;
  }
  return out;
}

} // namespace triwell::disk
