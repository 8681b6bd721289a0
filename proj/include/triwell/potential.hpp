#pragma once

#include "triwell/types.hpp"

#include <boost/multiprecision/float128.hpp>

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace triwell {

using quad = boost::multiprecision::float128;

template <typename Scalar> struct WDerivs {
  Scalar W;
  Vec2T<Scalar> grad;
  Mat2T<Scalar> hess;
};
using WDerivatives = WDerivs<double>;

struct Well {
  std::string label;
  Vec2 position;
  Vec2 eigenvalues;  // of D²W, ascending
  Mat2 eigenvectors; // columns, orthonormal
  double lambda1() const { return eigenvalues(0); }
  double lambda2() const { return eigenvalues(1); }
  Vec2 slow_direction() const { return eigenvectors.col(0); }
};

/// A nonnegative potential with its wells (three for the real thing,
/// fewer for test fixtures).
class Potential {
public:
  using Evaluator = std::function<WDerivs<double>(const Vec2 &)>;
  using QuadEvaluator = std::function<WDerivs<quad>(const Vec2T<quad> &)>;

  Potential(std::string family, Evaluator f, const std::vector<Vec2> &wells,
            double coercivity_radius, std::map<std::string, double> params = {},
            QuadEvaluator fq = {});

  WDerivs<double> derivatives(const Vec2 &u) const { return f_(u); }
  WDerivs<quad> derivatives(const Vec2T<quad> &u) const;
  double W(const Vec2 &u) const { return f_(u).W; }
  bool has_quad() const { return bool(fq_); }

  const std::string &family() const { return family_; }
  const std::map<std::string, double> &params() const { return params_; }
  double coercivity_radius() const { return M_; }

  const std::vector<Well> &wells() const { return wells_; }
  std::size_t well_count() const { return wells_.size(); }
  /// 1-based, matching the p1/p2/p3 labels.
  const Well &well(int label) const;

private:
  std::string family_;
  Evaluator f_;
  QuadEvaluator fq_;
  std::vector<Well> wells_;
  double M_;
  std::map<std::string, double> params_;
};

/// Checked evaluation: throws DomainError on non-finite input.
WDerivatives w_derivatives(const Potential &pot, const Vec2 &u);

/// W = u1²(u1²-1)² + (λ + μu1²)u2², wells (-1,0), (0,0), (1,0).
/// Throws ConfigurationError when λ <= 1 or 2(λ+μ) = 8.
Potential builtin_degenerate_triple(double lambda, double mu);
/// Same family without the hypothesis checks (fixtures only).
Potential degenerate_triple_family(double lambda, double mu);
/// W = ½(1-u1²)² + u2², wells (±1,0). Heteroclinic (tanh t, 0), energy 4/3.
Potential builtin_double_well();
/// W = c·Π|u - p_i|² with wells on the unit circle at 210°, 90°, 330°.
/// Wells are isotropic (repeated Hessian eigenvalue) and d13 < d12 + d23.
Potential triangle_potential(double c = 1.0);
/// W = ½ uᵀ Q u, Q with eigenvalues (l1, l2) along directions rotated by angle.
Potential quadratic_potential(double l1, double l2, double angle = 0.0);

/// Builtin lookup by family name: degenerate_triple, double_well, triangle, quadratic.
Potential make_builtin(const std::string &family, const std::map<std::string, double> &params);

struct ValidationOptions {
  double tol_well = 1e-10;
  double tol_zero = 1e-8;
  double tol_path = 1e-3;
  double tol_defect = 1e-3;
  double tol_gap = 1e-6;
  int grid_n = 201;
  int circle_samples = 360;
  double alignment_deg = 5.0;
};

struct ValidationReport {
  bool posdef = false;
  bool nonnegative = false;
  bool winfin = false;
  bool zero_set = false;
  bool degenerate = false;
  bool p2generic = false;
  bool geodesic_through_p2 = false;
  bool inconclusive = false;
  std::vector<Vec2> eigenvalues;
  double d12 = 0, d23 = 0, d13 = 0;
  double defect = 0;
  double p2_path_gap = 0;
  double min_radial_derivative = 0;
  double min_sampled_W = 0;
  std::vector<std::string> notes;
  bool all_pass() const {
    return posdef && nonnegative && winfin && zero_set && degenerate && p2generic &&
           geodesic_through_p2;
  }
};

ValidationReport validate_potential(const Potential &pot, const ValidationOptions &opt = {});

} // namespace triwell
