#include "triwell/disk2d.hpp"

#include <algorithm>
#include <cmath>

namespace triwell::disk {

Vec2 BoundaryTrace::at(double theta) const {
  const std::size_t M = samples.size();
  if (M == 0) throw DomainError("empty boundary trace");
  double a = (theta + M_PI) / (2 * M_PI) * double(M);
  a -= std::floor(a / double(M)) * double(M);
  std::size_t k0 = std::size_t(std::floor(a));
  const double w = a - double(k0);
  k0 %= M;
  const std::size_t k1 = (k0 + 1) % M;
  return (1 - w) * samples[k0] + w * samples[k1];
}

BoundaryTrace BoundaryTrace::from_function(double R, std::size_t M,
                                           const std::function<Vec2(double)> &f) {
  if (!(R > 0) || M < 8) throw DomainError("boundary trace needs R > 0 and at least 8 samples");
  BoundaryTrace tr;
  tr.R = R;
  tr.samples.resize(M);
  for (std::size_t k = 0; k < M; ++k) tr.samples[k] = f(-M_PI + 2 * M_PI * double(k) / double(M));
  return tr;
}

Field2D Field2D::make(double R, double h, const BoundaryTrace &trace) {
  if (!(R > 0) || !(h > 0) || h > R) throw DomainError("field needs 0 < h <= R");
  Field2D f;
  const int n = std::max(1, int(std::lround(R / h)));
  f.R = R;
  f.h = R / n;
  f.N = 2 * n + 1;
  f.trace = trace;
  const std::size_t NN = std::size_t(f.N) * std::size_t(f.N);
  f.values.assign(NN, Vec2::Zero());
  f.mask.assign(NN, 0);
  f.pinned.assign(NN, 0);
  const double R2 = R * R * (1 + 1e-12);
  for (int j = 0; j < f.N; ++j)
    for (int i = 0; i < f.N; ++i) {
      const double x = f.x(i), y = f.y(j);
      f.mask[f.index(i, j)] = x * x + y * y <= R2;
    }
  for (int j = 0; j < f.N; ++j)
    for (int i = 0; i < f.N; ++i) {
      const std::size_t k = f.index(i, j);
      if (!f.mask[k]) {
        f.pinned[k] = 1;
        continue;
      }
      const bool edge = i == 0 || j == 0 || i == f.N - 1 || j == f.N - 1;
      f.pinned[k] = edge || !f.mask[f.index(i - 1, j)] || !f.mask[f.index(i + 1, j)] ||
                    !f.mask[f.index(i, j - 1)] || !f.mask[f.index(i, j + 1)];
    }
  f.boundary_ring = trace.samples;
  if (!f.boundary_ring.empty()) f.boundary_ring.push_back(f.boundary_ring.front());
  f.apply_trace();
  return f;
}

void Field2D::apply_trace() {
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) {
      const std::size_t k = index(i, j);
      if (pinned[k]) values[k] = trace.at(std::atan2(y(j), x(i)));
    }
}

void Field2D::fill(const std::function<Vec2(double, double)> &f) {
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) {
      const std::size_t k = index(i, j);
      if (!pinned[k]) values[k] = f(x(i), y(j));
    }
  apply_trace();
}

Vec2 Field2D::sample(const Vec2 &p) const {
  const double gx = std::clamp((p(0) + R) / h, 0.0, double(N - 1));
  const double gy = std::clamp((p(1) + R) / h, 0.0, double(N - 1));
  const int i0 = std::min(int(gx), N - 2), j0 = std::min(int(gy), N - 2);
  const double wx = gx - i0, wy = gy - j0;
  return (1 - wy) * ((1 - wx) * at(i0, j0) + wx * at(i0 + 1, j0)) +
         wy * ((1 - wx) * at(i0, j0 + 1) + wx * at(i0 + 1, j0 + 1));
}

void Field2D::validate() const {
  if (N < 3 || values.size() != std::size_t(N) * std::size_t(N))
    throw DomainError("field grid is inconsistent");
  for (const auto &v : values)
    if (!std::isfinite(v(0)) || !std::isfinite(v(1))) throw DomainError("field has non-finite values");
}

} // namespace triwell::disk
