#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "disctrans/action.hpp"

namespace disctrans {

struct SolveConfig {
  int time_steps = 128;
  /// Strictly decreasing smoothing levels; delta * pi is added to the
  /// midpoint measures inside the mean.
  std::vector<double> smoothing_schedule = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
  int max_iterations = 20000;
  /// The last stage lowers the barrier weight to feasibility_tol / (n (N - 1)),
  /// which pushes masses that vanish at the optimum towards this level.
  double feasibility_tol = 1e-9;
  /// Frank-Wolfe gap target on the smoothed squared distance.
  double objective_tol = 1e-6;
  /// Only used to perturb the initial curve; seed 0 keeps the linear interpolation.
  std::uint64_t seed = 0;

  /// Throws Errc::InvalidConfig.
  void validate() const;
};

struct SmoothingStage {
  double delta = 0.0;
  double objective = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct GeodesicResult {
  DiscreteCurve curve;
  /// Unsmoothed discrete action of the returned curve.
  double action = 0.0;
  double distance = 0.0;
  /// Optimal smoothed objective at the terminal smoothing level.
  double smoothed_objective = 0.0;
  double residual = 0.0;
  bool converged = true;
  /// False when the delta = 0 momentum could not be formed and the terminal
  /// smoothed momentum was kept instead.
  bool unsmoothed_momentum = true;
  std::vector<SmoothingStage> trace;
  std::optional<double> dual_gap;
};

/// Minimizes the discretized action over curves joining mu0 to mu1.
GeodesicResult solve_geodesic(const MarkovTriple& triple, const Mean& mean, const Vector& mu0,
                              const Vector& mu1, const SolveConfig& config);

/// Solves between curve points at the probed times and reports
/// max |W(mu_s, mu_t) - |t - s| W| / W. Probe times must lie on the grid.
double constant_speed_check(const MarkovTriple& triple, const Mean& mean, const GeodesicResult& result,
                            std::span<const std::pair<double, double>> probes, const SolveConfig& config);

struct LocalityComparison {
  GeodesicResult restricted;
  GeodesicResult full;
  /// Zero extension of the restricted curve to the full state space.
  DiscreteCurve lifted;
  double lifted_action = 0.0;
  double distance_restricted = 0.0;
  double distance_full = 0.0;
};

/// Throws Errc::SubsetNotConnected, Errc::SupportLeak.
LocalityComparison restricted_vs_full_cost(const MarkovTriple& triple, const SubsetMask& subset, const Mean& mean,
                                           const Vector& mu0, const Vector& mu1, const SolveConfig& config);

/// Embeds a curve on restrict(triple, subset) into the full state space by zeros.
DiscreteCurve zero_extend(const MarkovTriple& triple, const SubsetMask& subset, const DiscreteCurve& curve);

/// Time reversal; a feasible curve stays feasible with equal action.
DiscreteCurve reverse_curve(const DiscreteCurve& curve);

/// Gradient of the reduced objective f(mu_1..mu_{N-1}) = min_V sum_k dt A(mid_k + delta pi, V_k)
/// at the curve's measures; entry j-1 holds the column of mu_j.
std::vector<Vector> reduced_gradient(const MarkovTriple& triple, const Mean& mean, const DiscreteCurve& curve,
                                     double delta = 0.0);

/// Per-interval potentials p_k with L_k p_k = -(mu_{k+1} - mu_k)/dt, mean zero;
/// the optimal momentum is m_e (p_x - p_y).
std::vector<Vector> interval_potentials(const MarkovTriple& triple, const Mean& mean, const DiscreteCurve& curve,
                                        double delta = 0.0);

/// Projection of v onto the probability simplex.
Vector project_simplex(const Vector& v);

}  // namespace disctrans
