#include "disctrans/retraction.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

namespace disctrans {

namespace {

bool integer_rates(const MarkovTriple& triple) {
  const Matrix& q = triple.rates();
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const double v = q.data()[i];
    if (v != std::round(v) || std::abs(v) > 9.0e15) return false;
  }
  return true;
}

// lhs <= rhs, exactly for integer rates (sums of integers below 2^53 are exact).
bool dominated(double lhs, double rhs, bool exact) {
  if (exact) return lhs <= rhs;
  return lhs <= rhs + 1e-12 * std::max(1.0, std::abs(rhs));
}

void check_into(const MarkovTriple& triple, const Retraction& t) {
  if (static_cast<int>(t.map.size()) != triple.size() || t.subset.size() != triple.size())
    throw Error(Errc::MapNotIntoSubset, "map must assign one image to every state");
  for (int x = 0; x < triple.size(); ++x)
    if (t.map[x] < 0 || t.map[x] >= triple.size() || !t.subset.contains(t.map[x]))
      throw Error(Errc::MapNotIntoSubset, "image lies outside the subset", {{"state", triple.states()[x]}});
}

}  // namespace

Retraction verify_retraction(const MarkovTriple& triple, Retraction candidate) {
  check_into(triple, candidate);
  const int n = triple.size();
  const bool exact = integer_rates(triple);
  candidate.fixed_point_failures.clear();
  candidate.violations.clear();
  for (int y = 0; y < n; ++y)
    if (candidate.subset.contains(y) && candidate.map[y] != y) candidate.fixed_point_failures.push_back(y);
  std::vector<double> sums(n);
  for (int x = 0; x < n; ++x) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (int xp = 0; xp < n; ++xp) sums[candidate.map[xp]] += triple.rate(x, xp);
    const int y = candidate.map[x];
    for (int yp = 0; yp < n; ++yp) {
      if (yp == y || !candidate.subset.contains(yp)) continue;
      if (!dominated(sums[yp], triple.rate(y, yp), exact))
        candidate.violations.push_back({x, y, yp, sums[yp], triple.rate(y, yp)});
    }
  }
  candidate.verified = candidate.fixed_point_failures.empty() && candidate.violations.empty();
  return candidate;
}

bool verify_simple_characterization(const MarkovTriple& triple, const Retraction& candidate) {
  if (!triple.is_simple_walk()) throw Error(Errc::NotSimpleWalk, "characterization needs rates in {0, 1}");
  check_into(triple, candidate);
  const int n = triple.size();
  const auto& t = candidate.map;
  for (int y = 0; y < n; ++y)
    if (candidate.subset.contains(y) && t[y] != y) return false;
  for (const Edge& e : triple.edges())
    if (t[e.x] != t[e.y] && !triple.adjacent(t[e.x], t[e.y])) return false;
  for (int x = 0; x < n; ++x) {
    const std::vector<int> nb = neighbors(triple, x);
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j)
        if (t[nb[i]] == t[nb[j]] && t[x] != t[nb[i]]) return false;
  }
  return true;
}

namespace {

class Search {
 public:
  Search(const MarkovTriple& triple, const SubsetMask& subset, std::uint64_t budget)
      : triple_(triple), subset_(subset), budget_(budget), n_(triple.size()), exact_(integer_rates(triple)) {
    map_.assign(n_, -1);
    load_ = Matrix::Zero(n_, n_);
    for (int y = 0; y < n_; ++y)
      if (subset.contains(y)) assign(y, y);
    order_ = bfs_order();
    for (int y : subset.indices()) targets_.push_back(y);
  }

  SearchResult run() {
    SearchResult res;
    const bool found = descend(0);
    res.nodes = nodes_;
    if (found) {
      Retraction r;
      r.subset = subset_;
      r.map = map_;
      res.retraction = verify_retraction(triple_, r);
      res.status = SearchStatus::Found;
    } else {
      res.status = exhausted_ ? SearchStatus::BudgetExhausted : SearchStatus::ProvedAbsent;
    }
    return res;
  }

 private:
  // Free states by BFS distance from Y.
  std::vector<int> bfs_order() const {
    std::vector<int> dist(n_, -1);
    std::queue<int> q;
    for (int y = 0; y < n_; ++y)
      if (subset_.contains(y)) {
        dist[y] = 0;
        q.push(y);
      }
    std::vector<int> order;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      if (!subset_.contains(u)) order.push_back(u);
      for (int v : neighbors(triple_, u))
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          q.push(v);
        }
    }
    return order;
  }

  void assign(int x, int y) {
    map_[x] = y;
    for (int u = 0; u < n_; ++u) load_(u, y) += triple_.rate(u, x);
  }

  void unassign(int x) {
    const int y = map_[x];
    for (int u = 0; u < n_; ++u) load_(u, y) -= triple_.rate(u, x);
    map_[x] = -1;
  }

  // Partial fibre sums only grow as more states are assigned.
  bool consistent(int u) const {
    const int y = map_[u];
    for (int yp : targets_)
      if (yp != y && !dominated(load_(u, yp), triple_.rate(y, yp), exact_)) return false;
    return true;
  }

  bool feasible_after(int x) const {
    if (!consistent(x)) return false;
    for (int u : neighbors(triple_, x))
      if (map_[u] >= 0 && !consistent(u)) return false;
    return true;
  }

  std::vector<int> candidates(int x) const {
    std::vector<int> out;
    auto push = [&](int y) {
      if (std::find(out.begin(), out.end(), y) == out.end()) out.push_back(y);
    };
    for (int u : neighbors(triple_, x))
      if (map_[u] >= 0) push(map_[u]);
    const std::vector<int> first(out);
    for (int y : first)
      for (int v : neighbors(triple_, y))
        if (subset_.contains(v)) push(v);
    for (int y : targets_) push(y);
    return out;
  }

  bool descend(std::size_t depth) {
    if (depth == order_.size()) return true;
    const int x = order_[depth];
    for (int y : candidates(x)) {
      if (++nodes_ > budget_) {
        exhausted_ = true;
        return false;
      }
      assign(x, y);
      if (feasible_after(x) && descend(depth + 1)) return true;
      unassign(x);
      if (exhausted_) return false;
    }
    return false;
  }

  const MarkovTriple& triple_;
  const SubsetMask& subset_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  bool exhausted_ = false;
  int n_;
  bool exact_;
  std::vector<int> map_;
  // load_(u, y) = sum over assigned x' with T(x') = y of Q(u, x').
  Matrix load_;
  std::vector<int> order_;
  std::vector<int> targets_;
};

}  // namespace

SearchResult find_retraction(const MarkovTriple& triple, const SubsetMask& subset, std::uint64_t budget) {
  if (subset.size() != triple.size() || !is_connected_subset(triple, subset))
    throw Error(Errc::SubsetNotConnected, "subset must be nonempty and connected");
  return Search(triple, subset, budget).run();
}

bool retraction_exists_exhaustive(const MarkovTriple& triple, const SubsetMask& subset) {
  const std::vector<int> ys = subset.indices();
  const std::vector<int> free = subset.complement().indices();
  if (ys.empty()) return false;
  Retraction r;
  r.subset = subset;
  r.map.resize(triple.size());
  for (int y : ys) r.map[y] = y;
  std::vector<std::size_t> digit(free.size(), 0);
  while (true) {
    for (std::size_t i = 0; i < free.size(); ++i) r.map[free[i]] = ys[digit[i]];
    if (verify_retraction(triple, r).verified) return true;
    std::size_t i = 0;
    while (i < digit.size() && ++digit[i] == ys.size()) digit[i++] = 0;
    if (i == digit.size()) return false;
  }
}

Retraction cycle_retraction(const MarkovTriple& cycle, int k) {
  const int n = cycle.size();
  if (k < 1 || k >= n) throw Error(Errc::InvalidConfig, "need 1 <= k < n", {{"n", n}, {"k", k}});
  if (2 * k > n) throw Error(Errc::NoRetraction, "the n-cycle retracts onto {1..k} only when 2k <= n", {{"n", n}, {"k", k}});
  Retraction r;
  r.subset = SubsetMask(std::vector<bool>(n, false));
  r.map.resize(n);
  for (int j = 1; j <= n; ++j) {
    int image = 1;
    if (j <= k) {
      image = j;
      r.subset.set(j - 1, true);
    } else if (j <= 2 * k) {
      image = 2 * k - j + 1;
    }
    r.map[j - 1] = image - 1;
  }
  return verify_retraction(cycle, r);
}

Retraction grid_retraction(const MarkovTriple& triple, std::span<const std::vector<int>> coords,
                           std::span<const int> lo, std::span<const int> hi) {
  const int n = triple.size();
  if (static_cast<int>(coords.size()) != n || lo.size() != hi.size())
    throw Error(Errc::InvalidConfig, "coordinates and bounds do not match the state space");
  for (std::size_t d = 0; d < lo.size(); ++d)
    if (lo[d] > hi[d]) throw Error(Errc::EmptyRectangle, "rectangle has an empty side", {{"axis", d}});
  std::map<std::vector<int>, int> where;
  for (int x = 0; x < n; ++x) {
    if (coords[x].size() != lo.size()) throw Error(Errc::InvalidConfig, "coordinate dimension mismatch");
    where[coords[x]] = x;
  }
  Retraction r;
  r.subset = SubsetMask(std::vector<bool>(n, false));
  r.map.resize(n);
  for (int x = 0; x < n; ++x) {
    std::vector<int> c = coords[x];
    for (std::size_t d = 0; d < c.size(); ++d) c[d] = std::clamp(c[d], lo[d], hi[d]);
    const auto it = where.find(c);
    if (it == where.end())
      throw Error(Errc::MapNotIntoSubset, "rectangle is not contained in the state space", {{"state", triple.states()[x]}});
    r.map[x] = it->second;
    if (c == coords[x]) r.subset.set(x, true);
  }
  if (r.subset.count() == 0) throw Error(Errc::EmptyRectangle, "rectangle contains no state");
  return verify_retraction(triple, r);
}

Retraction tree_retraction(const MarkovTriple& tree, const SubsetMask& subtree, int anchor) {
  const int n = tree.size();
  if (static_cast<int>(tree.edges().size()) != n - 1) throw Error(Errc::NotATree, "graph has a cycle");
  if (subtree.size() != n || !is_connected_subset(tree, subtree))
    throw Error(Errc::NotASubtree, "subset must be a nonempty connected subtree");
  if (anchor < 0) anchor = subtree.indices().front();
  if (anchor >= n || !subtree.contains(anchor)) throw Error(Errc::UnknownAnchor, "anchor must lie in the subtree");
  // Parent pointers towards the anchor; paths in a tree are unique.
  std::vector<int> parent(n, -1);
  std::queue<int> q;
  parent[anchor] = anchor;
  q.push(anchor);
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : neighbors(tree, u))
      if (parent[v] < 0) {
        parent[v] = u;
        q.push(v);
      }
  }
  Retraction r;
  r.subset = subtree;
  r.map.resize(n);
  for (int x = 0; x < n; ++x) {
    int u = x;
    while (!subtree.contains(u)) u = parent[u];
    r.map[x] = u;
  }
  return verify_retraction(tree, r);
}

Retraction cut_retraction(const MarkovTriple& triple, int x, int y, const SubsetMask& side_x) {
  if (!triple.is_simple_walk()) throw Error(Errc::NotSimpleWalk, "cuts are defined for rates in {0, 1}");
  const int n = triple.size();
  if (x < 0 || y < 0 || x >= n || y >= n || x == y || !triple.adjacent(x, y))
    throw Error(Errc::InvalidCut, "cut needs two adjacent states");
  if (side_x.size() != n || !side_x.contains(x) || side_x.contains(y))
    throw Error(Errc::InvalidCut, "x must lie in A_x and y in A_y");
  Retraction r;
  r.subset = SubsetMask::from_indices(n, std::vector<int>{x, y});
  r.map.resize(n);
  for (int u = 0; u < n; ++u) r.map[u] = side_x.contains(u) ? x : y;
  return verify_retraction(triple, r);
}

Retraction restrict_retraction(const MarkovTriple& triple, const Retraction& t, const SubsetMask& outer) {
  if (!t.verified) throw Error(Errc::NotARetraction, "restriction needs a verified retraction");
  const int n = triple.size();
  if (outer.size() != n) throw Error(Errc::SubsetOrderViolated, "outer subset has the wrong size");
  for (int y = 0; y < n; ++y)
    if (t.subset.contains(y) && !outer.contains(y))
      throw Error(Errc::SubsetOrderViolated, "target subset is not contained in the outer subset",
                  {{"state", triple.states()[y]}});
  const MarkovTriple sub = restrict(triple, outer);
  const std::vector<int> idx = outer.indices();
  std::vector<int> local(n, -1);
  for (std::size_t a = 0; a < idx.size(); ++a) local[idx[a]] = static_cast<int>(a);
  Retraction r;
  r.subset = SubsetMask(std::vector<bool>(idx.size(), false));
  r.map.resize(idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a) {
    r.map[a] = local[t.map[idx[a]]];
    if (t.subset.contains(idx[a])) r.subset.set(static_cast<int>(a), true);
  }
  return verify_retraction(sub, r);
}

Vector pushforward(const Retraction& t, const Vector& nu) {
  Vector out = Vector::Zero(nu.size());
  for (Eigen::Index x = 0; x < nu.size(); ++x) out(t.map[x]) += nu(x);
  return out;
}

}  // namespace disctrans
