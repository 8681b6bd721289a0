#pragma once

#include "triwell/chain.hpp"
#include "triwell/metric.hpp"

#include <vector>

namespace triwell::hetero {

struct HeteroclinicProfile {
  int i = 1, j = 2;
  Path1D path; // end samples sit exactly on p_i and p_j
  double connection_energy = 0.0;
  double midpoint_shift = 0.0;
  double decay_left = 0.0, decay_right = 0.0; // fitted rates, 0 if not fitted
  double residual = 0.0;    // sup of |ζ'' - ∇W(ζ)| over interior nodes
  double residual_l2 = 0.0; // discrete L²
  bool converged = false;
  bool no_direct_connection = false;
  double min_gap_other = 0.0; // min_t |ζ(t) - p_k| for the third well

  const Vec2 &left_well() const { return path.samples.front(); }
  const Vec2 &right_well() const { return path.samples.back(); }
  /// ζ(s), equal to the end wells outside the sampled window.
  Vec2 eval(double s) const { return path.at(s); }
  /// ζ^ℓ(s): wells beyond ±ℓ, ζ on |s| < ℓ-1, linear in between.
  Vec2 truncated(double s, double ell) const;
  /// The same connection traversed backwards (ζ_ji(s) = ζ_ij(-s)).
  HeteroclinicProfile reversed() const;
};

struct SolveOptions {
  ChainOptions chain{400, 1e-8};
  bool normalize = true;
  bool fit_decay = true;
  double tol_mid = 1e-6;
  double init_shift = 0.0; // centre of the initial tanh guess
  double init_width = 1.0;
  metric::DistanceOptions distance{129, 17, 1, 200, 1e-10, 1e-6};
};

/// Minimizes the 1D energy on [-L, L] with ends pinned to p_i, p_j.
HeteroclinicProfile solve_heteroclinic(const Potential &pot, int i, int j, double L, std::size_t n,
                                       const SolveOptions &opt = {});

/// Shifts the parameter so that d(p_i, ζ(0)) = d(p_j, ζ(0)).
HeteroclinicProfile midpoint_normalize(const Potential &pot, const HeteroclinicProfile &profile,
                                       const SolveOptions &opt = {});

/// sup and L² norms of ζ'' - ∇W(ζ) over the interior nodes.
std::pair<double, double> ode_residual(const Potential &pot, const Path1D &path);

enum class Side { Left, Right };

struct DecayFit {
  double rate = 0.0;
  double prefactor = 0.0;
  double r2 = 0.0;
  int samples = 0;
};

/// Least-squares slope of log|ζ - p| on the window 1e-6 < |ζ - p| < 1e-2.
DecayFit decay_fit(const Path1D &path, Side side, double lo = 1e-6, double hi = 1e-2);
inline DecayFit decay_fit(const HeteroclinicProfile &p, Side side) { return decay_fit(p.path, side); }

struct SpectrumOptions {
  int max_iters = 3000;
  double tol = 1e-8;
  int extra_block = 8;
  double shift = -0.02;
};

struct SpectrumReport {
  std::vector<double> eigenvalues; // ascending
  std::vector<double> residuals;
  int near_zero_index = 0;
  double near_zero = 0.0;
  double overlap = 0.0;
  double next = 0.0;
  double gap = 0.0;
  int iterations = 0;
  int count_below(double tol) const {
    int c = 0;
    for (double e : eigenvalues) c += std::abs(e) < tol;
    return c;
  }
};

/// Lowest k eigenpairs of v ↦ -v'' + D²W(ζ)v with zero boundary values.
SpectrumReport linearized_spectrum(const Potential &pot, const Path1D &path, int k,
                                   const SpectrumOptions &opt = {});

/// Applies the discrete operator to interior values v (2(n-2) entries).
Eigen::VectorXd apply_linearized(const Potential &pot, const Path1D &path, const Eigen::VectorXd &v);

struct Alignment {
  double angle12 = 0.0;
  double angle32 = 0.0;
  bool generic = false;
};

/// Angles between the p2 tails of ζ12, ζ32 and the slow eigenvector of D²W(p2).
Alignment p2_alignment(const Potential &pot, const HeteroclinicProfile &z12,
                       const HeteroclinicProfile &z32, double tol_deg = 5.0);

struct Truncation {
  Path1D path;
  double ell = 0.0;
  bool clamped = false;
  double energy = 0.0;
  double excess = 0.0; // E(ζ^ℓ) - E(ζ), summed locally
  double l2_sq = 0.0;  // ‖ζ^ℓ - ζ‖²
};

Truncation truncate_heteroclinic(const Potential &pot, const HeteroclinicProfile &profile,
                                 double ell);

struct TruncationFit {
  double A_energy = 0.0, a_energy = 0.0, r2_energy = 0.0;
  double A_l2 = 0.0, a_l2 = 0.0, r2_l2 = 0.0;
};

/// Fits excess ≈ A·e^{-aℓ} and ‖ζ^ℓ - ζ‖² ≈ A·e^{-aℓ} over the given ℓ.
TruncationFit fit_truncation(const Potential &pot, const HeteroclinicProfile &profile,
                             const std::vector<double> &ells);

} // namespace triwell::hetero
