#include "disctrans/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

namespace disctrans {

namespace {

MarkovTriple from_edges(int n, const std::vector<std::pair<int, int>>& edges, std::vector<std::string> names = {}) {
  Matrix q = Matrix::Zero(n, n);
  for (const auto& [a, b] : edges) {
    q(a, b) = 1.0;
    q(b, a) = 1.0;
  }
  if (names.empty())
    for (int i = 0; i < n; ++i) names.push_back(std::to_string(i + 1));
  return MarkovTriple::validate(std::move(names), std::move(q));
}

}  // namespace

SubsetMask GluedTriple::first_image() const {
  return SubsetMask::from_indices(result.size(), from_first);
}

SubsetMask GluedTriple::second_image() const {
  return SubsetMask::from_indices(result.size(), from_second);
}

Vector glued_stationary(const MarkovTriple& t1, int x1, const MarkovTriple& t2, int x2) {
  const Vector& p1 = t1.stationary();
  const Vector& p2 = t2.stationary();
  const double rest1 = 1.0 - p1(x1);
  const double rest2 = 1.0 - p2(x2);
  const double z = 1.0 / (1.0 - rest1 * rest2);
  Vector pi(t1.size() + t2.size() - 1);
  for (int x = 0; x < t1.size(); ++x) pi(x) = z * (x == x1 ? p1(x1) * p2(x2) : p1(x) * p2(x2));
  int next = t1.size();
  for (int x = 0; x < t2.size(); ++x)
    if (x != x2) pi(next++) = z * p1(x1) * p2(x);
  return pi;
}

GluedTriple glue(const MarkovTriple& t1, std::string_view x1_name, const MarkovTriple& t2, std::string_view x2_name) {
  int x1 = -1;
  int x2 = -1;
  try {
    x1 = t1.index_of(x1_name);
    x2 = t2.index_of(x2_name);
  } catch (const Error&) {
    throw Error(Errc::UnknownAnchor, "gluing anchor is not a state of its triple",
                {{"x1", std::string(x1_name)}, {"x2", std::string(x2_name)}});
  }
  const int n1 = t1.size();
  const int n = n1 + t2.size() - 1;
  GluedTriple g;
  g.star = x1;
  g.from_first.resize(n1);
  for (int x = 0; x < n1; ++x) g.from_first[x] = x;
  g.from_second.resize(t2.size());
  std::vector<std::string> names = t1.states();
  std::set<std::string> used(names.begin(), names.end());
  int next = n1;
  for (int x = 0; x < t2.size(); ++x) {
    if (x == x2) {
      g.from_second[x] = x1;
      continue;
    }
    std::string name = t2.states()[x];
    while (used.count(name)) name += "'";
    used.insert(name);
    names.push_back(name);
    g.from_second[x] = next++;
  }
  Matrix q = Matrix::Zero(n, n);
  for (int a = 0; a < n1; ++a)
    for (int b = 0; b < n1; ++b) q(g.from_first[a], g.from_first[b]) = t1.rate(a, b);
  for (int a = 0; a < t2.size(); ++a)
    for (int b = 0; b < t2.size(); ++b)
      if (a != b) q(g.from_second[a], g.from_second[b]) = t2.rate(a, b);
  const Vector closed = glued_stationary(t1, x1, t2, x2);
  g.result = MarkovTriple::validate(std::move(names), std::move(q));
  g.stationary_discrepancy = (g.result.stationary() - closed).cwiseAbs().maxCoeff();
  if (g.stationary_discrepancy > 1e-12)
    throw Error(Errc::StationaryMismatch, "closed-form stationary measure disagrees with the linear solve",
                {{"discrepancy", g.stationary_discrepancy}});
  return g;
}

bool is_dead_end(const MarkovTriple& triple, const SubsetMask& first, const SubsetMask& second) {
  const int n = triple.size();
  if (first.size() != n || second.size() != n) return false;
  int common = 0;
  for (int x = 0; x < n; ++x)
    if (first.contains(x) && second.contains(x)) ++common;
  if (common != 1) return false;
  for (int x = 0; x < n; ++x) {
    if (!first.contains(x) || second.contains(x)) continue;
    for (int y = 0; y < n; ++y)
      if (second.contains(y) && !first.contains(y) && (triple.rate(x, y) != 0.0 || triple.rate(y, x) != 0.0))
        return false;
  }
  return true;
}

DiscreteCurve project_dead_end(const MarkovTriple& triple, const DiscreteCurve& curve, const SubsetMask& first,
                               int star) {
  const int n = triple.size();
  if (first.size() != n || star < 0 || star >= n || !first.contains(star))
    throw Error(Errc::NotADeadEnd, "star must belong to the first part");
  SubsetMask second = first.complement();
  second.set(star, true);
  if (!is_dead_end(triple, first, second)) throw Error(Errc::NotADeadEnd, "complement is not a dead end");
  DiscreteCurve out;
  out.grid = curve.grid;
  for (const Vector& mu : curve.measures) {
    Vector m = mu;
    for (int x = 0; x < n; ++x)
      if (!first.contains(x)) {
        m(star) += m(x);
        m(x) = 0.0;
      }
    out.measures.push_back(m);
  }
  for (const EdgeField& v : curve.momenta) {
    EdgeField w = v;
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        if (!first.contains(x) || !first.contains(y)) w(x, y) = 0.0;
    out.momenta.push_back(w);
  }
  return out;
}

namespace {

[[noreturn]] void hypothesis(const std::string& which) {
  throw Error(Errc::HypothesisViolated, "variation formula hypothesis fails: " + which, {{"hypothesis", which}});
}

}  // namespace

double cycle_variation(const MarkovTriple& cycle, const Mean& mean, const Vector& mu, const EdgeField& v,
                       const Vector& nu, const EdgeField& u) {
  const int n = cycle.size();
  if (n < 3) hypothesis("cycle length at least 3");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const bool neighbour = j == (i + 1) % n || i == (j + 1) % n;
      if (i != j && neighbour != (cycle.rate(i, j) > 0.0)) hypothesis("rates supported on the cycle");
    }
  if (!check_boundary_growth(mean).satisfied) hypothesis("mean grows at the boundary");
  try {
    check_probability(cycle, mu);
    check_probability(cycle, nu);
  } catch (const Error&) {
    hypothesis("mu and nu are probability vectors");
  }
  if (!(mu(0) > 0.0 && mu(1) > 0.0)) hypothesis("mu positive on 1 and 2");
  for (int i = 2; i < n; ++i)
    if (mu(i) != 0.0) hypothesis("mu supported on {1, 2}");
  const double vs = std::max(1.0, v.values().cwiseAbs().maxCoeff());
  const double us = std::max(1.0, u.values().cwiseAbs().maxCoeff());
  if (!v.is_antisymmetric(1e-12 * vs) || !u.is_antisymmetric(1e-12 * us)) hypothesis("antisymmetric fields");
  if (v(0, 1) == 0.0) hypothesis("V(1, 2) nonzero");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!((i == 0 && j == 1) || (i == 1 && j == 0)) && v(i, j) != 0.0) hypothesis("V supported on {1, 2}");
  if (u(0, 1) != 0.0) hypothesis("U(1, 2) zero");
  if (!std::isfinite(action_value(cycle, mean, nu, u))) hypothesis("finite action of (nu, U)");

  const double q12 = cycle.rate(0, 1);
  const double q21 = cycle.rate(1, 0);
  const double s = mu(0) * q12;
  const double t = mu(1) * q21;
  const double lam = mean.eval(s, t);
  const auto [d1, d2] = mean.partials(s, t);
  const double v12 = v(0, 1);
  double value = -v12 * v12 / lam * (1.0 + (d1 * nu(0) * q12 + d2 * nu(1) * q21) / lam);
  for (int i = 2; i + 1 < n; ++i)
    value += action_integrand(mean, nu(i) * cycle.rate(i, i + 1), nu(i + 1) * cycle.rate(i + 1, i), u(i, i + 1));
  return value;
}

double action_difference_quotient(const MarkovTriple& triple, const Mean& mean, const Vector& mu,
                                  const EdgeField& v, const Vector& nu, const EdgeField& u, double alpha) {
  const Vector ma = (1.0 - alpha) * mu + alpha * nu;
  const EdgeField va(Matrix((1.0 - alpha) * v.values() + alpha * u.values()));
  return (action_value(triple, mean, ma, va) - action_value(triple, mean, mu, v)) / alpha;
}

MarkovTriple cycle_graph(int n) {
  if (n < 2) throw Error(Errc::InvalidConfig, "cycle needs at least 2 states");
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  if (n > 2) e.emplace_back(n - 1, 0);
  return from_edges(n, e);
}

MarkovTriple path_graph(int n) {
  if (n < 1) throw Error(Errc::InvalidConfig, "path needs at least 1 state");
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return from_edges(n, e);
}

MarkovTriple complete_graph(int n) {
  if (n < 1) throw Error(Errc::InvalidConfig, "complete graph needs at least 1 state");
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return from_edges(n, e);
}

MarkovTriple random_tree(int n, std::uint64_t seed) {
  if (n < 1) throw Error(Errc::InvalidConfig, "tree needs at least 1 state");
  std::mt19937_64 rng(seed);
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i < n; ++i) e.emplace_back(std::uniform_int_distribution<int>(0, i - 1)(rng), i);
  return from_edges(n, e);
}

MarkovTriple random_connected(int n, double p, std::uint64_t seed) {
  if (n < 1) throw Error(Errc::InvalidConfig, "graph needs at least 1 state");
  std::mt19937_64 rng(seed);
  std::set<std::pair<int, int>> e;
  for (int i = 1; i < n; ++i) {
    const int j = std::uniform_int_distribution<int>(0, i - 1)(rng);
    e.emplace(j, i);
  }
  std::bernoulli_distribution coin(p);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (!e.count({i, j}) && coin(rng)) e.emplace(i, j);
  return from_edges(n, {e.begin(), e.end()});
}

MarkovTriple random_reversible(const MarkovTriple& support, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight(0.5, 2.0);
  const int n = support.size();
  Vector pi(n);
  for (int x = 0; x < n; ++x) pi(x) = weight(rng);
  pi /= pi.sum();
  Matrix q = Matrix::Zero(n, n);
  for (const Edge& e : support.edges()) {
    const double c = weight(rng) * 0.1;
    q(e.x, e.y) = c / pi(e.x);
    q(e.y, e.x) = c / pi(e.y);
  }
  return MarkovTriple::validate(support.states(), q);
}

LatticePatch grid_graph(const std::vector<int>& dims) {
  if (dims.empty()) throw Error(Errc::InvalidConfig, "grid needs at least one dimension");
  int n = 1;
  for (int d : dims) {
    if (d < 1) throw Error(Errc::InvalidConfig, "grid sides must be positive");
    n *= d;
  }
  LatticePatch patch;
  std::vector<std::string> names;
  std::map<std::vector<int>, int> index;
  for (int i = 0; i < n; ++i) {
    std::vector<int> c(dims.size());
    int rest = i;
    for (int d = static_cast<int>(dims.size()) - 1; d >= 0; --d) {
      c[d] = rest % dims[d];
      rest /= dims[d];
    }
    std::string name = "v";
    for (std::size_t d = 0; d < c.size(); ++d) name += (d ? "_" : "") + std::to_string(c[d]);
    names.push_back(name);
    index[c] = i;
    patch.coords.push_back(c);
  }
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dims.size(); ++d) {
      std::vector<int> c = patch.coords[i];
      if (++c[d] < dims[d]) e.emplace_back(i, index[c]);
    }
  patch.triple = from_edges(n, e, names);
  patch.cell = SubsetMask(std::vector<bool>(n, false));
  return patch;
}

namespace {

using Point = std::pair<int, int>;

// Corners of the hexagon centred at the origin, counter-clockwise from angle 0.
constexpr std::array<Point, 6> kCorners = {{{2, 0}, {1, 1}, {-1, 1}, {-2, 0}, {-1, -1}, {1, -1}}};
// Rays from the centre through the midpoints of the sides, at 30 + 60 i degrees.
constexpr std::array<Point, 6> kRays = {{{3, 1}, {0, 2}, {-3, 1}, {-3, -1}, {0, -2}, {3, -1}}};

long cross(Point a, Point b) { return static_cast<long>(a.first) * b.second - static_cast<long>(a.second) * b.first; }

}  // namespace

LatticePatch honeycomb_patch(int radius) {
  if (radius < 0) throw Error(Errc::InvalidConfig, "radius must be nonnegative");
  std::vector<Point> centres;
  for (int a = -radius; a <= radius; ++a)
    for (int b = -radius; b <= radius; ++b)
      if (std::abs(a) + std::abs(b) + std::abs(a + b) <= 2 * radius) centres.push_back({3 * a, a + 2 * b});
  std::set<Point> vertices;
  std::set<std::pair<Point, Point>> sides;
  for (const Point& c : centres)
    for (int i = 0; i < 6; ++i) {
      const Point p{c.first + kCorners[i].first, c.second + kCorners[i].second};
      const Point q{c.first + kCorners[(i + 1) % 6].first, c.second + kCorners[(i + 1) % 6].second};
      vertices.insert(p);
      sides.insert(std::minmax(p, q));
    }
  // Central cell first, in corner order.
  std::vector<Point> order(kCorners.begin(), kCorners.end());
  for (const Point& p : vertices)
    if (std::find(order.begin(), order.end(), p) == order.end()) order.push_back(p);
  std::map<Point, int> index;
  LatticePatch patch;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < order.size(); ++i) {
    index[order[i]] = static_cast<int>(i);
    names.push_back("h" + std::to_string(order[i].first) + "_" + std::to_string(order[i].second));
    patch.coords.push_back({order[i].first, order[i].second});
  }
  std::vector<std::pair<int, int>> e;
  for (const auto& [p, q] : sides) e.emplace_back(index[p], index[q]);
  const int n = static_cast<int>(order.size());
  patch.triple = from_edges(n, e, names);
  std::vector<int> cell{0, 1, 2, 3, 4, 5};
  patch.cell = SubsetMask::from_indices(n, cell);
  return patch;
}

Retraction honeycomb_retraction(const LatticePatch& patch) {
  const int n = patch.triple.size();
  Retraction r;
  r.subset = patch.cell;
  r.map.resize(n);
  for (int x = 0; x < n; ++x) {
    const Point v{patch.coords[x][0], patch.coords[x][1]};
    int sector = -1;
    for (int i = 0; i < 6; ++i) {
      const long a = cross(kRays[i], v);
      const long b = cross(v, kRays[(i + 1) % 6]);
      if (a == 0 || b == 0)
        throw Error(Errc::InvalidConfig, "vertex lies on a sector boundary", {{"state", patch.triple.states()[x]}});
      if (a > 0 && b > 0) sector = i;
    }
    // Sector i holds the cell corner at angle 60 (i + 1) degrees.
    r.map[x] = (sector + 1) % 6;
  }
  return verify_retraction(patch.triple, r);
}

MarkovTriple generate(const GraphFamily& family) {
  const auto& p = family.params;
  auto need = [&](std::size_t k) {
    if (p.size() < k)
      throw Error(Errc::InvalidConfig, "family '" + family.name + "' needs " + std::to_string(k) + " parameter(s)");
  };
  if (family.name == "cycle") return need(1), cycle_graph(p[0]);
  if (family.name == "path") return need(1), path_graph(p[0]);
  if (family.name == "complete") return need(1), complete_graph(p[0]);
  if (family.name == "grid") return need(1), grid_graph(p).triple;
  if (family.name == "honeycomb") return need(1), honeycomb_patch(p[0]).triple;
  if (family.name == "tree") return need(1), random_tree(p[0], family.seed);
  if (family.name == "random") return need(2), random_connected(p[0], p[1] / 100.0, family.seed);
  throw Error(Errc::InvalidConfig, "unknown family '" + family.name + "'");
}

}  // namespace disctrans
