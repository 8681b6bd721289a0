#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace triwell {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

template <typename Scalar> using Vec2T = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using Mat2T = Eigen::Matrix<Scalar, 2, 2>;

// Error taxonomy; the CLI maps these onto exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : Error {
  using Error::Error;
};
struct ConfigurationError : Error {
  using Error::Error;
};
struct PreconditionError : Error {
  using Error::Error;
};
struct StructureError : Error {
  using Error::Error;
};
struct ConvergenceError : Error {
  using Error::Error;
};

/// Uniformly sampled curve t -> x(t) in the target plane.
struct Path1D {
  double t_start = 0.0;
  double t_end = 1.0;
  std::vector<Vec2> samples;

  Path1D() = default;
  Path1D(double t0, double t1, std::vector<Vec2> x)
      : t_start(t0), t_end(t1), samples(std::move(x)) {}

  std::size_t size() const { return samples.size(); }
  double h() const { return (t_end - t_start) / double(samples.size() - 1); }
  double t(std::size_t k) const { return t_start + double(k) * h(); }
  const Vec2 &operator[](std::size_t k) const { return samples[k]; }
  Vec2 &operator[](std::size_t k) { return samples[k]; }

  /// Linear interpolation, clamped to the end samples outside the window.
  Vec2 at(double t) const;

  /// Throws DomainError if n < 2, h <= 0 or a sample is not finite.
  void validate() const;

  /// Resample to n points by linear interpolation on the same window.
  Path1D resampled(std::size_t n) const;
};

inline Vec2 Path1D::at(double t) const {
  const std::size_t n = samples.size();
  if (t <= t_start) return samples.front();
  if (t >= t_end) return samples.back();
  const double s = (t - t_start) / h();
  std::size_t k = std::size_t(s);
  if (k >= n - 1) k = n - 2;
  const double w = s - double(k);
  return (1.0 - w) * samples[k] + w * samples[k + 1];
}

inline void Path1D::validate() const {
  if (samples.size() < 2) throw DomainError("Path1D: need at least 2 samples");
  if (!(t_end > t_start)) throw DomainError("Path1D: empty parameter window");
  for (const auto &x : samples)
    if (!x.allFinite()) throw DomainError("Path1D: non-finite sample");
}

inline Path1D Path1D::resampled(std::size_t n) const {
  std::vector<Vec2> x(n);
  for (std::size_t k = 0; k < n; ++k)
    x[k] = at(t_start + (t_end - t_start) * double(k) / double(n - 1));
  return {t_start, t_end, std::move(x)};
}

/// Straight segment p -> q with n samples on [t0, t1].
inline Path1D segment_path(const Vec2 &p, const Vec2 &q, std::size_t n,
                           double t0 = 0.0, double t1 = 1.0) {
  std::vector<Vec2> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = double(k) / double(n - 1);
    x[k] = (1.0 - s) * p + s * q;
  }
  return {t0, t1, std::move(x)};
}

} // namespace triwell
