#include "triwell/disk2d.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>

namespace triwell::disk {

std::string template_name(Template t) {
  switch (t) {
  case Template::H12: return "H12";
  case Template::H23: return "H23";
  case Template::H13: return "H13";
  }
  return "?";
}

BlowdownResult blowdown_distance(const Potential &pot, const Field2D &field, double R_scale,
                                 int samples_per_axis) {
  field.validate();
  if (!(R_scale > 0) || R_scale > field.R * (1 + 1e-12))
    throw DomainError("blow-down radius must lie in (0, R]");
  const int n = std::max(16, samples_per_axis);
  const double dx = 2.0 / n;
  std::vector<Vec2> pts, vals;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 p(-1 + (i + 0.5) * dx, -1 + (j + 0.5) * dx);
      if (p.squaredNorm() > 1) continue;
      pts.push_back(p);
      vals.push_back(field.sample(R_scale * p));
    }
  const Vec2 p1 = pot.well(1).position, p2 = pot.well(2).position, p3 = pot.well(3).position;
  const Template all[3] = {Template::H12, Template::H23, Template::H13};
  auto dist = [&](Template t, double deg) {
    const Vec2 &L = t == Template::H23 ? p2 : p1;
    const Vec2 &Rw = t == Template::H12 ? p2 : p3;
    const double c = std::cos(deg * M_PI / 180), s = std::sin(deg * M_PI / 180);
    double acc = 0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      // template rotated by φ: sign of the first coordinate of R_{-φ} x
      const double xr = c * pts[k](0) + s * pts[k](1);
      acc += (vals[k] - (xr < 0 ? L : Rw)).norm();
    }
    return acc * dx * dx;
  };
  BlowdownResult res;
  res.l1_distance = INFINITY;
  for (Template t : all) {
    double best = INFINITY, best_deg = 0;
    for (int d = 0; d < 360; ++d) {
      const double v = dist(t, d);
      if (v < best) {
        best = v;
        best_deg = d;
      }
    }
    auto r = boost::math::tools::brent_find_minima([&](double d) { return dist(t, d); },
                                                   best_deg - 1.0, best_deg + 1.0, 30);
    if (r.second < best) {
      best = r.second;
      best_deg = r.first;
    }
    best_deg = std::fmod(best_deg + 360.0, 360.0);
    res.per_template.push_back(best);
    if (best < res.l1_distance) {
      res.l1_distance = best;
      res.best_template = t;
      res.best_rotation_deg = best_deg;
    }
  }
  return res;
}

} // namespace triwell::disk
