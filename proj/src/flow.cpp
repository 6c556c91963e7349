#include "disctrans/flow.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace disctrans {

namespace {

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

IntervalFlow solve_interval_flow(const MarkovTriple& triple, const Mean& mean, const Vector& mid,
                                 const Vector& source, double delta, double balance_tol) {
  const int n = triple.size();
  const auto& edges = triple.edges();
  const int ne = static_cast<int>(edges.size());
  IntervalFlow out;
  out.weights.resize(ne);
  out.potential = Vector::Zero(n);
  out.flow = Vector::Zero(ne);

  const Vector nu = mid + delta * triple.stationary();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (int e = 0; e < ne; ++e) {
    const double m = mean.eval_unchecked(nu(edges[e].x) * edges[e].q_xy, nu(edges[e].y) * edges[e].q_yx);
    out.weights(e) = m;
    if (m > 0.0) parent[find_root(parent, edges[e].x)] = find_root(parent, edges[e].y);
  }

  std::vector<std::vector<int>> components(n);
  for (int x = 0; x < n; ++x) components[find_root(parent, x)].push_back(x);

  const double scale = 1.0 + source.cwiseAbs().maxCoeff();
  std::vector<int> local(n, -1);
  for (const auto& comp : components) {
    if (comp.empty()) continue;
    double balance = 0.0;
    for (int x : comp) balance += source(x);
    if (std::abs(balance) > balance_tol * scale) out.feasible = false;
    if (comp.size() == 1) continue;
    // Ground the first node of the component; the reduced Laplacian is SPD.
    const int k = static_cast<int>(comp.size());
    for (int a = 0; a < k; ++a) local[comp[a]] = a;
    Matrix lap = Matrix::Zero(k, k);
    for (int e = 0; e < ne; ++e) {
      const double m = out.weights(e);
      if (m <= 0.0) continue;
      const int a = local[edges[e].x];
      const int b = local[edges[e].y];
      if (a < 0 || b < 0) continue;
      lap(a, a) += m;
      lap(b, b) += m;
      lap(a, b) -= m;
      lap(b, a) -= m;
    }
    Vector rhs(k - 1);
    for (int a = 1; a < k; ++a) rhs(a - 1) = source(comp[a]);
    const Vector sol = lap.bottomRightCorner(k - 1, k - 1).llt().solve(rhs);
    double avg = sol.sum() / k;
    out.potential(comp[0]) = -avg;
    for (int a = 1; a < k; ++a) out.potential(comp[a]) = sol(a - 1) - avg;
    for (int x : comp) local[x] = -1;
  }

  std::vector<double> terms(ne, 0.0);
  for (int e = 0; e < ne; ++e) {
    const double g = out.potential(edges[e].x) - out.potential(edges[e].y);
    out.flow(e) = out.weights(e) * g;
    terms[e] = out.weights(e) * g * g;
  }
  out.energy = out.feasible ? pairwise_sum(terms) : std::numeric_limits<double>::infinity();
  return out;
}

EdgeField flow_to_field(const MarkovTriple& triple, const Vector& flow) {
  EdgeField v(triple.size());
  const auto& edges = triple.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    v(edges[e].x, edges[e].y) = flow(static_cast<Eigen::Index>(e));
    v(edges[e].y, edges[e].x) = -flow(static_cast<Eigen::Index>(e));
  }
  return v;
}

}  // namespace disctrans
