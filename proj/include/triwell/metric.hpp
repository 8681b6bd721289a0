#pragma once

#include "triwell/potential.hpp"

#include <array>
#include <vector>

namespace triwell::metric {

struct DistanceOptions {
  std::size_t n = 129;        // nodes on the finest string
  std::size_t n_coarse = 17;  // first level of the coarse-to-fine ladder
  int multistart = 5;         // straight segment + bent starts
  int max_iters = 200;        // Newton iterations per level
  double tol_grad = 1e-6;     // per-node normal gradient
  double tol_coarse = 1e-4;
};

struct DistanceResult {
  double value = 0.0;
  Path1D path; // arclength parameter, endpoints exactly p and q
  int iterations = 0;
  bool converged = true;
  double residual = 0.0;
  int start_index = 0;
  std::vector<double> start_values; // one per multistart initial path
};

/// √2 · Σ √W(midpoint) |segment|.
double path_action(const Potential &pot, const Path1D &path);

DistanceResult degenerate_distance(const Potential &pot, const Vec2 &p, const Vec2 &q,
                                   const DistanceOptions &opt = {});

/// ½(√λ1 x̂1² + √λ2 x̂2²) in the eigenbasis; λ are eigenvalues of D²W.
double dQ_distance(const Vec2 &eigenvalues, const Mat2 &eigenvectors, const Vec2 &x);
inline double Q_norm(const Vec2 &eigenvalues, const Mat2 &eigenvectors, const Vec2 &x) {
  return std::sqrt(dQ_distance(eigenvalues, eigenvectors, x));
}

struct WellDistances3 {
  double d12 = 0, d23 = 0, d13 = 0;
  DistanceResult r12, r23, r13;
};
WellDistances3 well_distances(const Potential &pot, const DistanceOptions &opt = {});

/// d12 + d23 - d13.
double triangle_defect(const Potential &pot, const DistanceOptions &opt = {});

/// Largest r = r0/2^k with D²W positive definite on a sampled B_r(p).
double convexity_radius(const Potential &pot, const Well &well);
/// The same radius expressed in the degenerate metric: min over the circle of d(p, ·).
double convexity_radius_metric(const Potential &pot, const Well &well,
                               const DistanceOptions &opt = {});
/// ⅕ of the smallest metric convexity radius over all wells.
double default_eta(const Potential &pot);

struct FlowOptions {
  double dt = 0.05;
  double fd_step = 1e-4;
  double eta = -1.0; // convexity radius in metric units; < 0 → measured
  DistanceOptions distance{33, 9, 1, 100, 1e-12, 1e-9};
};

/// Integrates γ' = -∇d_p(γ) with RK4, ∇d_p from central differences of
/// local distance solves.
Path1D geodesic_gradient_flow(const Potential &pot, const Vec2 &start, const Well &well,
                              double T, const FlowOptions &opt = {});

/// Polar lookup of d(p, ·) around one well, interpolating d/r².
class WellTable {
public:
  WellTable() = default;
  WellTable(const Potential &pot, const Well &well, double r_max, int n_angle = 32,
            int n_radius = 16, const DistanceOptions &opt = {33, 9, 1, 100, 1e-12, 1e-9});
  double operator()(const Vec2 &x) const;
  double r_max() const { return r_max_; }

private:
  Vec2 p_ = Vec2::Zero();
  double r_max_ = 0.0;
  int na_ = 0, nr_ = 0;
  std::vector<double> q_; // (nr+1) x na, row 0 is the quadratic limit
};

/// Distances to every well via tables; d beyond a table is extrapolated and
/// only ever compared against thresholds well below the table radius.
class DistanceOracle {
public:
  DistanceOracle() = default;
  DistanceOracle(const Potential &pot, double eta);
  double eta() const { return eta_; }
  double distance(int label, const Vec2 &x) const { return tables_.at(label - 1)(x); }
  /// (label, distance) of the nearest well.
  std::pair<int, double> nearest(const Vec2 &x) const;

private:
  double eta_ = 0.0;
  std::vector<WellTable> tables_;
};

} // namespace triwell::metric
