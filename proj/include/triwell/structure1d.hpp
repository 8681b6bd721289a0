#pragma once

#include "triwell/fit.hpp"
#include "triwell/heteroclinic.hpp"
#include "triwell/metric.hpp"

#include <functional>
#include <string>
#include <vector>

namespace triwell::structure {

struct Interval {
  std::size_t k0 = 0, k1 = 0; // node range, shared endpoints with neighbours
  double t0 = 0, t1 = 0;
  double energy = 0;
  int label = 0; // well label for plateaus, 0 for transitions
};

struct TransitionDecomposition {
  double eta = 0;
  std::vector<Interval> plateaus;
  std::vector<Interval> transitions;
  std::vector<int> sequence; // plateau labels in order
  std::vector<std::string> anomalies;
  double total_energy = 0;
  std::string sequence_string() const;
};

/// Transition intervals are maximal runs with d(f, P) > η that reach above 4η.
TransitionDecomposition transition_decomposition(const Potential &pot, const Path1D &path,
                                                 const metric::DistanceOracle &oracle);
TransitionDecomposition transition_decomposition(const Potential &pot, const Path1D &path,
                                                 double eta);

/// Discrete H¹² distance between f and g on the nodes of f inside [w0, w1].
double h1_sq_distance(const Path1D &f, const std::function<Vec2(double)> &g, double w0, double w1);

struct SplitOptions {
  double search = 2.0;    // half-width of the shift refinement, parameter units
  double tie_tol = 1e-12; // ties in the p2 argmin
};

struct SplitPoints {
  double a = 0, T = 0, b = 0;
  double a_median = 0, b_median = 0;
  double h1_sq_12 = 0, h1_sq_23 = 0;                       // absolute windows
  double h1_sq_12_recentered = 0, h1_sq_23_recentered = 0; // windows moved with a, b
  double p2_gap = 0;
  double gamma = 0;
  double separation = 0;
  double separation_c = 0;
  TransitionDecomposition decomposition;
};

SplitPoints locate_split(const Potential &pot, const Path1D &path,
                         const metric::DistanceOracle &oracle, const hetero::HeteroclinicProfile &z12,
                         const hetero::HeteroclinicProfile &z23, const SplitOptions &opt = {});

struct EndwellBound {
  double energy = 0, distance = 0, bound = 0, slack = 0;
};

/// E(f) on [0,R] against d(f(0), p) - A·e^{-aR}.
EndwellBound lower_bound_endwell(const Potential &pot, const Path1D &path, const Well &well,
                                 double eta, double A, double a);

struct EndwellStudy {
  std::vector<double> R;
  std::vector<double> energy;
  std::vector<double> slack; // E_min(R) - E_min(R_ref), computed in quad precision
  double reference = 0;
  LinearFit fit; // log|slack| against R
  bool converged = true;
};

/// Pinned-start, free-end minimizers on [0, R] in quad precision.
EndwellStudy endwell_decay_study(const Potential &pot, int well, const Vec2 &start,
                                 const std::vector<double> &Rs, double h, double R_ref);

struct InteriorBound {
  double energy = 0;
  double excess = 0; // energy - 2η
  double min_sq = 0; // min_t |f(t) - p2|²
};

/// Measures E, E - 2η and min|f - p2|²; checks the endpoint preconditions.
InteriorBound interior_well_bound(const Potential &pot, const Path1D &path, double eta, double eps,
                                  double tol_eta = 0.05);

struct PenaltyStudy {
  Vec2 a, b;
  std::vector<double> delta, excess, min_sq;
  double excess_through = 0; // unconstrained minimizer through p2
  double c = 0;              // slope of excess against δ²
  double r2 = 0;
  double c_minsq = 0;        // slope of excess against measured min|f - p2|²
};

/// Points on the slow axis of p2 at metric distance η, one per side.
std::pair<Vec2, Vec2> p2_endpoints(const Potential &pot, double eta);

/// Minimizers on [-R, R] between the p2 endpoints, forced through p2 + δ·e_fast at t = 0.
PenaltyStudy interior_penalty_study(const Potential &pot, double eta, double R, double h,
                                    const std::vector<double> &deltas);

struct SchatzmanGap {
  double best_shift = 0;
  double h1_sq_distance = 0;
  double energy_excess = 0;
  double ratio = 0;
};

SchatzmanGap schatzman_gap(const Potential &pot, const Path1D &candidate,
                           const hetero::HeteroclinicProfile &reference, double beta = 0.5);

} // namespace triwell::structure
