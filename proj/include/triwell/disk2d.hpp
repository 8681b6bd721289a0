#pragma once

#include "triwell/heteroclinic.hpp"
#include "triwell/metric.hpp"
#include "triwell/structure1d.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace triwell::disk {

/// u(Re^{iθ}) at θ_k = -π + 2πk/M, periodic.
struct BoundaryTrace {
  double R = 1.0;
  std::vector<Vec2> samples;

  Vec2 at(double theta) const;
  static BoundaryTrace from_function(double R, std::size_t M,
                                     const std::function<Vec2(double)> &f);
  double spacing() const { return 2.0 * M_PI * R / double(samples.size()); }
};

/// Square grid on [-R, R]² holding values at every node. Nodes outside the
/// disk carry the radial extension of the trace; they and the ring of disk
/// nodes touching them are pinned.
struct Field2D {
  double R = 1.0;
  double h = 0.1;
  int N = 0; // nodes per side
  std::vector<Vec2> values;
  std::vector<std::uint8_t> mask;   // x² + y² <= R²
  std::vector<std::uint8_t> pinned; // outside or on the boundary ring
  BoundaryTrace trace;
  std::vector<Vec2> boundary_ring; // trace samples, closed (first == last)

  static Field2D make(double R, double h, const BoundaryTrace &trace);

  std::size_t index(int i, int j) const { return std::size_t(j) * std::size_t(N) + std::size_t(i); }
  double x(int i) const { return -R + h * i; }
  double y(int j) const { return -R + h * j; }
  Vec2 &at(int i, int j) { return values[index(i, j)]; }
  const Vec2 &at(int i, int j) const { return values[index(i, j)]; }
  /// Bilinear sample; points off the grid are clamped to it.
  Vec2 sample(const Vec2 &p) const;
  /// Sets every free node from f and every pinned node from the trace.
  void fill(const std::function<Vec2(double, double)> &f);
  void apply_trace();
  void validate() const;
};

struct EnergyReport {
  double total = 0;
  double gradient_part = 0;
  double potential_part = 0;
};

/// Area of {x² + y² <= R²} ∩ [x0,x1] × [y0,y1].
double disk_rect_area(double R, double x0, double x1, double y0, double y1);

/// Q1-type cell quadrature: ½(mean of the two squared x-differences + same in y)
/// + corner mean of W, weighted by the exact in-disk area of each cell.
/// An optional region keeps only cells whose centre satisfies it.
EnergyReport energy_2d(const Potential &pot, const Field2D &field,
                       const std::function<bool(double, double)> &region = {}, int workers = 1);

struct Rect {
  double x0 = -0.5, x1 = 0.5, y0 = -0.5, y1 = 0.5;
};

/// E_R(u_R, Ω) = ∫_Ω ½R⁻¹|∇u_R|² + R·W(u_R), evaluated on the blown-down grid.
double rescaled_energy(const Potential &pot, const Field2D &field, double R_scale, const Rect &omega);
/// E(u, RΩ ∩ B_R) on the physical grid (for the scaling identity).
double energy_on_rect(const Potential &pot, const Field2D &field, const Rect &rect);

struct Interface {
  int i = 1, j = 2;
  Vec2 a, b;
};

struct Region {
  enum Kind { Rectangle, Disk } kind = Rectangle;
  Rect rect;
  double radius = 1.0;
};

/// Σ d_ij · |segment ∩ Ω|, with d from {d12, d23, d13}.
double sharp_energy(const std::vector<Interface> &geometry, const Region &omega, double d12,
                    double d23, double d13);

enum class Template { H12, H23, H13 };
std::string template_name(Template t);

struct BlowdownResult {
  Template best_template = Template::H13;
  double best_rotation_deg = 0.0;
  double l1_distance = 0.0;
  std::vector<double> per_template; // H12, H23, H13 minima
};

BlowdownResult blowdown_distance(const Potential &pot, const Field2D &field, double R_scale,
                                 int samples_per_axis = 200);

struct AngleSet {
  double R = 1.0;
  double a21 = 0, a32 = 0, abar = 0, b12 = 0, b23 = 0, bbar = 0;
  double L1() const;
  double L3() const;
  double ell() const;
  double eps() const;
  bool ordered() const;
};

struct AngleReport {
  AngleSet angles;
  structure::SplitPoints upper, lower;
  double boundary_energy = 0;
  double max_dist_p1 = 0; // off-arc closeness, p1 arcs beyond the transitions
  double max_dist_p3 = 0;
};

/// Upper/lower half-circle restrictions in the parameter τ running p1 → p3.
Path1D upper_restriction(const BoundaryTrace &trace, double h);
Path1D lower_restriction(const BoundaryTrace &trace, double h);

AngleReport boundary_angles(const Potential &pot, const BoundaryTrace &trace,
                            const metric::DistanceOracle &oracle, double gamma,
                            const hetero::HeteroclinicProfile &z12,
                            const hetero::HeteroclinicProfile &z23, double h);

/// Trace built from truncated walls planted at the given angles.
BoundaryTrace synthetic_trace(const hetero::HeteroclinicProfile &z12,
                              const hetero::HeteroclinicProfile &z23, double R, double a21,
                              double a32, double b12, double b23, double ell, std::size_t M);

struct CompetitorParams {
  double ell = 3.0;
  double rho = 1.0;
  double sigma = 1.0;
  double C = 1.0;       // admissibility C <= σ, ρ <= R/C
  double eps_max = 0.2; // angle tilt beyond which the construction is refused
};

Field2D build_competitor(const Potential &pot, const BoundaryTrace &trace, const AngleSet &angles,
                         const hetero::HeteroclinicProfile &z12,
                         const hetero::HeteroclinicProfile &z23, double h,
                         const CompetitorParams &par);

struct BoundConstants {
  double C = 1.0;
  double c = 1.0;
};

double upper_bound_formula(const AngleSet &angles, double ell, double rho, double sigma,
                           double eta, double gamma, const BoundConstants &k, double d12,
                           double d23);

struct SliceFunction {
  Vec2 u1, u3;
  double l1 = 0, l3 = 0;
  Vec2 a1, b1, a3, b3;
  double R = 1.0;
  bool single = false; // u1 ≈ u3: one linear function
  double operator()(const Vec2 &x) const;
  double range_min() const;
  double range_max() const;
};

SliceFunction slice_function(const AngleSet &angles);

struct LevelSet {
  std::vector<std::vector<Vec2>> polylines;
  char slice_case = 'd';
};

LevelSet extract_level_set(const SliceFunction &zeta, double t);

struct SliceRow {
  double t = 0;
  char slice_case = 'd';
  double delta = 0;
  double energy = 0;
  double bound = 0;
  bool in_T = false;
};

struct SliceConstants {
  double c_slice = 1.0; // rate in the exp(-c·min(√R, δ/(ε+R^{-1/2}))) correction
  double c_final = 0.0; // strengthening c·e^{-C R0} on slices in T
  double C_final = 1.0;
  double C_tail = 1.0;  // subtracted C·e^{-cR}
  double c_tail = 1.0;
};

struct SliceBound {
  double total_bound = 0;
  double measured_integral = 0;
  std::vector<SliceRow> rows;
  double covered_T = 0; // measure of T
};

SliceBound slice_lower_bound(const Potential &pot, const Field2D &field, const SliceFunction &zeta,
                             const metric::DistanceOracle &oracle, const AngleSet &angles, double R0,
                             int n_slices, double d12, double d23, const SliceConstants &k);

struct MinimizeOptions {
  int max_iters = 4000; // per level
  double tol_opt = 1e-6; // sup |∂E/∂u| / h²
  int levels = 3;        // coarse-to-fine, spacing h·2^k
  int memory = 8;
  int workers = 1;
};

struct MinimizeResult {
  Field2D field;
  bool converged = false;
  int iterations = 0;
  double residual = 0;
  EnergyReport energy;
  std::vector<std::vector<double>> history; // energies per level, in iteration order
};

/// L-BFGS with energy-monotone backtracking on the free nodes. extra_pin marks
/// additional nodes held at their initial value.
MinimizeResult minimize_field(const Potential &pot, const BoundaryTrace &trace, double R, double h,
                              const std::function<Vec2(double, double)> &init,
                              const MinimizeOptions &opt = {},
                              const std::function<bool(double, double)> &extra_pin = {});

} // namespace triwell::disk
