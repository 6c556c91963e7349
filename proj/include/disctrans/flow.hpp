#pragma once

#include "disctrans/action.hpp"

namespace disctrans {

/// Cheapest momentum carrying a prescribed divergence at a frozen measure:
/// minimize sum_e w_e^2 / m_e subject to div w = source, with edge weights
/// m_e = Lambda(nu(x) Q(x,y), nu(y) Q(y,x)) and nu = mid + delta * pi. The
/// minimizer is w = m * (p_x - p_y) with L_m p = source.
struct IntervalFlow {
  Vector weights;    // m_e per triple edge
  Vector potential;  // p, mean zero on each weight component
  Vector flow;       // w_e = V(x, y) for edge e = {x < y}
  double energy = 0.0;
  bool feasible = true;
};

/// With delta > 0 every weight is positive; with delta == 0 the graph may
/// split into weight components, each of which must balance `source`
/// within `balance_tol`, otherwise `feasible` is false and energy is +inf.
IntervalFlow solve_interval_flow(const MarkovTriple& triple, const Mean& mean, const Vector& mid,
                                 const Vector& source, double delta, double balance_tol = 1e-9);

EdgeField flow_to_field(const MarkovTriple& triple, const Vector& flow);

}  // namespace disctrans
