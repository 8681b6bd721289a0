#include "triwell/disk2d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <thread>

namespace triwell::disk {

namespace {

// ∫ √(R² - x²) dx
double F(double R, double x) {
  x = std::clamp(x, -R, R);
  return 0.5 * (x * std::sqrt(std::max(0.0, R * R - x * x)) + R * R * std::asin(x / R));
}

} // namespace

double disk_rect_area(double R, double x0, double x1, double y0, double y1) {
  x0 = std::max(x0, -R);
  x1 = std::min(x1, R);
  y0 = std::max(y0, -R);
  y1 = std::min(y1, R);
  if (x1 <= x0 || y1 <= y0) return 0.0;
  // integrand min(y1, s) - max(y0, -s) is smooth between these breakpoints
  std::array<double, 8> bp{};
  int nb = 0;
  bp[nb++] = x0;
  bp[nb++] = x1;
  for (double c : {y0, y1}) {
    const double s = std::sqrt(std::max(0.0, R * R - c * c));
    if (-s > x0 && -s < x1) bp[nb++] = -s;
    if (s > x0 && s < x1) bp[nb++] = s;
  }
  std::sort(bp.begin(), bp.begin() + nb);
  double area = 0;
  for (int k = 0; k + 1 < nb; ++k) {
    const double a = bp[k], b = bp[k + 1];
    if (b <= a) continue;
    const double m = 0.5 * (a + b);
    const double sm = std::sqrt(std::max(0.0, R * R - m * m));
    if (std::min(y1, sm) - std::max(y0, -sm) <= 0) continue;
    const double top = y1 < sm ? y1 * (b - a) : F(R, b) - F(R, a);
    const double bot = y0 > -sm ? y0 * (b - a) : -(F(R, b) - F(R, a));
    area += top - bot;
  }
  return std::max(0.0, area);
}

namespace {

struct CellSums {
  double grad = 0, pot = 0;
};

template <class Weight>
EnergyReport cell_energy(const Potential &pot, const Field2D &f, Weight weight, int workers) {
  const int N = f.N;
  std::vector<double> Wn(f.values.size());
  std::vector<CellSums> rows(std::size_t(N - 1));
  auto node_pass = [&](int j0, int j1) {
    for (int j = j0; j < j1; ++j)
      for (int i = 0; i < N; ++i) Wn[f.index(i, j)] = pot.W(f.at(i, j));
  };
  auto cell_pass = [&](int j0, int j1) {
    for (int j = j0; j < j1; ++j) {
      CellSums s;
      for (int i = 0; i + 1 < N; ++i) {
        const double w = weight(i, j);
        if (w <= 0) continue;
        const Vec2 &a = f.at(i, j), &b = f.at(i + 1, j), &c = f.at(i, j + 1), &d = f.at(i + 1, j + 1);
        const double g = 0.25 * ((b - a).squaredNorm() + (d - c).squaredNorm() +
                                 (c - a).squaredNorm() + (d - b).squaredNorm());
        const double p = 0.25 * f.h * f.h *
                         (Wn[f.index(i, j)] + Wn[f.index(i + 1, j)] + Wn[f.index(i, j + 1)] +
                          Wn[f.index(i + 1, j + 1)]);
        s.grad += w * g;
        s.pot += w * p;
      }
      rows[std::size_t(j)] = s;
    }
  };
  auto run = [&](int count, auto &&fn) {
    const int nw = std::max(1, std::min(workers, count));
    if (nw == 1) return fn(0, count);
    std::vector<std::thread> th;
    for (int w = 0; w < nw; ++w)
      th.emplace_back(fn, count * w / nw, count * (w + 1) / nw);
    for (auto &t : th) t.join();
  };
  run(N, node_pass);
  run(N - 1, cell_pass);
  EnergyReport r;
  for (const auto &s : rows) {
    r.gradient_part += s.grad;
    r.potential_part += s.pot;
  }
  r.total = r.gradient_part + r.potential_part;
  return r;
}

} // namespace

EnergyReport energy_2d(const Potential &pot, const Field2D &field,
                       const std::function<bool(double, double)> &region, int workers) {
  field.validate();
  const double h = field.h, R = field.R, h2 = h * h;
  auto weight = [&](int i, int j) {
    const double x0 = field.x(i), y0 = field.y(j);
    if (region && !region(x0 + 0.5 * h, y0 + 0.5 * h)) return 0.0;
    const double far = std::max(std::abs(x0), std::abs(x0 + h));
    const double fy = std::max(std::abs(y0), std::abs(y0 + h));
    if (far * far + fy * fy <= R * R) return 1.0;
    return disk_rect_area(R, x0, x0 + h, y0, y0 + h) / h2;
  };
  return cell_energy(pot, field, weight, workers);
}

double energy_on_rect(const Potential &pot, const Field2D &field, const Rect &rc) {
  field.validate();
  const double h = field.h, R = field.R, h2 = h * h;
  auto weight = [&](int i, int j) {
    const double x0 = std::max(field.x(i), rc.x0), x1 = std::min(field.x(i) + h, rc.x1);
    const double y0 = std::max(field.y(j), rc.y0), y1 = std::min(field.y(j) + h, rc.y1);
    if (x1 <= x0 || y1 <= y0) return 0.0;
    return disk_rect_area(R, x0, x1, y0, y1) / h2;
  };
  return cell_energy(pot, field, weight, 1).total;
}

double rescaled_energy(const Potential &pot, const Field2D &field, double R_scale, const Rect &om) {
  if (!(R_scale > 0)) throw DomainError("rescaling needs R > 0");
  const Rect phys{R_scale * om.x0, R_scale * om.x1, R_scale * om.y0, R_scale * om.y1};
  if (phys.x0 < -field.R - 1e-12 || phys.x1 > field.R + 1e-12 || phys.y0 < -field.R - 1e-12 ||
      phys.y1 > field.R + 1e-12)
    throw DomainError("R·Ω leaves the field support");
  // Blown-down grid: spacing ĥ = h/R, values unchanged.
  const double hh = field.h / R_scale, R = field.R;
  double total = 0;
  std::vector<double> Wn(field.values.size());
  for (std::size_t k = 0; k < Wn.size(); ++k) Wn[k] = pot.W(field.values[k]);
  for (int j = 0; j + 1 < field.N; ++j)
    for (int i = 0; i + 1 < field.N; ++i) {
      const double x0 = std::max(field.x(i), phys.x0), x1 = std::min(field.x(i) + field.h, phys.x1);
      const double y0 = std::max(field.y(j), phys.y0), y1 = std::min(field.y(j) + field.h, phys.y1);
      if (x1 <= x0 || y1 <= y0) continue;
      const double frac = disk_rect_area(R, x0, x1, y0, y1) / (field.h * field.h);
      if (frac <= 0) continue;
      const Vec2 &a = field.at(i, j), &b = field.at(i + 1, j), &c = field.at(i, j + 1),
                 &d = field.at(i + 1, j + 1);
      const double grad2 = 0.5 * ((b - a).squaredNorm() + (d - c).squaredNorm() +
                                  (c - a).squaredNorm() + (d - b).squaredNorm()) /
                           (hh * hh);
      const double wavg = 0.25 * (Wn[field.index(i, j)] + Wn[field.index(i + 1, j)] +
                                  Wn[field.index(i, j + 1)] + Wn[field.index(i + 1, j + 1)]);
      total += frac * hh * hh * (0.5 * grad2 / R_scale + R_scale * wavg);
    }
  return total;
}

namespace {

double clip_length(const Vec2 &a, const Vec2 &b, const Region &om) {
  const Vec2 d = b - a;
  double t0 = 0, t1 = 1;
  if (om.kind == Region::Rectangle) {
    const double lo[2] = {om.rect.x0, om.rect.y0}, hi[2] = {om.rect.x1, om.rect.y1};
    for (int k = 0; k < 2; ++k) {
      if (std::abs(d(k)) < 1e-300) {
        if (a(k) < lo[k] || a(k) > hi[k]) return 0.0;
        continue;
      }
      double s0 = (lo[k] - a(k)) / d(k), s1 = (hi[k] - a(k)) / d(k);
      if (s0 > s1) std::swap(s0, s1);
      t0 = std::max(t0, s0);
      t1 = std::min(t1, s1);
    }
  } else {
    // |a + t d|² <= r²
    const double A = d.squaredNorm(), B = 2 * a.dot(d), C = a.squaredNorm() - om.radius * om.radius;
    if (A < 1e-300) return 0.0;
    const double disc = B * B - 4 * A * C;
    if (disc <= 0) return 0.0;
    const double sq = std::sqrt(disc);
    t0 = std::max(t0, (-B - sq) / (2 * A));
    t1 = std::min(t1, (-B + sq) / (2 * A));
  }
  return t1 > t0 ? (t1 - t0) * d.norm() : 0.0;
}

} // namespace

double sharp_energy(const std::vector<Interface> &geometry, const Region &omega, double d12,
                    double d23, double d13) {
  double e = 0;
  for (const auto &s : geometry) {
    const int lo = std::min(s.i, s.j), hi = std::max(s.i, s.j);
    double d;
    if (lo == 1 && hi == 2) d = d12;
    else if (lo == 2 && hi == 3) d = d23;
    else if (lo == 1 && hi == 3) d = d13;
    else throw DomainError("unknown interface label pair");
    e += d * clip_length(s.a, s.b, omega);
  }
  return e;
}

} // namespace triwell::disk
