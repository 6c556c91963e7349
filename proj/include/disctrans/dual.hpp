#pragma once

#include <vector>

#include "disctrans/action.hpp"
#include "disctrans/geodesic.hpp"
#include "disctrans/retraction.hpp"

namespace disctrans {

/// Potential piecewise linear in time on an increasing grid.
struct HJPotential {
  std::vector<double> grid;
  std::vector<Vector> values;

  int intervals() const { return static_cast<int>(grid.size()) - 1; }
  double horizon() const { return grid.back() - grid.front(); }
  /// (phi_{k+1} - phi_k) / dt_k.
  Vector time_derivative(int k) const;

  static HJPotential zero(int n, int intervals, double horizon = 1.0);
};

/// max over the simplex of F(mu) = <a, mu> + 1/2 ||G||_mu^2.
struct HamiltonianMax {
  /// F at the witness; a lower bound on the maximum.
  double value = 0.0;
  /// Upper bound max_x dF/dmu(x) at an interior point (concavity and homogeneity).
  double upper = 0.0;
  Vector witness;
};

HamiltonianMax hj_violation(const MarkovTriple& triple, const Mean& mean, const Vector& phidot,
                            const EdgeField& grad_phi);

/// <a, mu> + 1/2 ||G||_mu^2 at a given measure.
double hamiltonian(const MarkovTriple& triple, const Mean& mean, const Vector& phidot, const EdgeField& grad_phi,
                   const Vector& mu);

inline constexpr double kCertificationTol = 1e-8;

struct HJCertificate {
  double max_violation = 0.0;
  /// Max over intervals of the rigorous upper bounds.
  double upper_bound = 0.0;
  bool subsolution = false;
  std::vector<double> interval_values;
  std::vector<double> interval_upper;
  std::vector<Vector> witnesses;
};

/// Checks every interval at both endpoint gradients; the Hamiltonian is
/// convex in t along a linear interpolation, so the endpoints dominate.
HJCertificate is_hj_subsolution(const MarkovTriple& triple, const Mean& mean, const HJPotential& phi,
                                double tol = kCertificationTol);

/// <phi_T, mu1> - <phi_0, mu0>.
double dual_value(const HJPotential& phi, const Vector& mu0, const Vector& mu1);

struct DualConfig {
  /// Primal solve used for the warm start; its time_steps sets M.
  SolveConfig primal;
  double tol = kCertificationTol;
  /// Supergradient polish steps after the warm start.
  int max_iterations = 20;
  /// Extra warm starts from geodesics between (1 - eps) mu + eps pi.
  std::vector<double> endpoint_mixing = {1e-2};
};

struct DualResult {
  HJPotential potential;
  double lower_bound = 0.0;
  double max_violation = 0.0;
  int iterations = 0;
  HJCertificate certificate;
  /// Primal upper bound from the warm-start solve.
  double primal_action = 0.0;
};

/// Lower bound on W^2 / 2 by a certified subsolution.
DualResult solve_dual(const MarkovTriple& triple, const Mean& mean, const Vector& mu0, const Vector& mu1,
                      const DualConfig& config);

/// Warm-start potential on the primal grid from phi = -p on the intervals.
HJPotential potential_from_curve(const MarkovTriple& triple, const Mean& mean, const DiscreteCurve& curve,
                                 double delta = 0.0);

/// Subtracts a spatially constant g(t) with g(0) = 0 and slope max(0, upper_k)
/// on every interval, which makes all upper bounds nonpositive.
HJPotential repair_subsolution(const MarkovTriple& triple, const Mean& mean, const HJPotential& phi);

/// phi^l(s) = phi(s / l) / l on [0, l T]; keeps subsolutions.
HJPotential scale_subsolution(const HJPotential& phi, double lambda);

struct ExtendedPotential {
  HJPotential potential;
  HJCertificate certificate;
};

/// phi o T on X from a certified potential on restrict(triple, subset).
/// Throws Errc::NotARetraction, Errc::UncertifiedInput.
ExtendedPotential extend_subsolution(const MarkovTriple& triple, const Mean& mean, const HJPotential& phi_y,
                                     const Retraction& t, double tol = kCertificationTol);

}  // namespace disctrans
