#include "disctrans/markov.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace disctrans {

namespace {

std::vector<bool> reachable(const Matrix& rates, int source, bool transpose) {
  const int n = static_cast<int>(rates.rows());
  std::vector<bool> seen(n, false);
  std::deque<int> queue{source};
  seen[source] = true;
  while (!queue.empty()) {
    const int x = queue.front();
    queue.pop_front();
    for (int y = 0; y < n; ++y) {
      const double q = transpose ? rates(y, x) : rates(x, y);
      if (q > 0.0 && !seen[y]) {
        seen[y] = true;
        queue.push_back(y);
      }
    }
  }
  return seen;
}

}  // namespace

bool is_irreducible(const Matrix& rates) {
  if (rates.rows() == 0) return false;
  const auto fwd = reachable(rates, 0, false);
  const auto bwd = reachable(rates, 0, true);
  return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
         std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
}

Vector stationary_measure(const Matrix& rates) {
  if (rates.rows() != rates.cols()) throw Error(Errc::NotSquare, "rate matrix is not square");
  if (!is_irreducible(rates)) throw Error(Errc::NotIrreducible, "rate matrix is not irreducible");
  const int n = static_cast<int>(rates.rows());
  Matrix gen = rates;
  gen.diagonal().setZero();
  for (int x = 0; x < n; ++x) gen(x, x) = -gen.row(x).sum();
  // Solve L^T pi = 0 with the last equation replaced by normalization.
  Matrix a = gen.transpose();
  a.row(n - 1).setOnes();
  Vector b = Vector::Zero(n);
  b(n - 1) = 1.0;
  Vector pi = a.fullPivLu().solve(b);
  for (int x = 0; x < n; ++x) pi(x) = std::max(pi(x), 0.0);
  pi /= pi.sum();
  return pi;
}

MarkovTriple MarkovTriple::validate(std::vector<std::string> states, Matrix rates,
                                    std::optional<Vector> pi) {
  const int n = static_cast<int>(rates.rows());
  if (rates.cols() != n || static_cast<int>(states.size()) != n || n == 0)
    throw Error(Errc::NotSquare, "rate matrix must be square and match the state list",
                {{"rows", rates.rows()}, {"cols", rates.cols()}, {"states", states.size()}});

  MarkovTriple t;
  for (int x = 0; x < n; ++x) {
    if (!t.index_.emplace(states[x], x).second)
      throw Error(Errc::ParseError, "duplicate state identifier '" + states[x] + "'");
  }
  for (int x = 0; x < n; ++x) {
    if (rates(x, x) != 0.0)
      throw Error(Errc::NonzeroDiagonal, "diagonal rate must be zero at state '" + states[x] + "'",
                  {{"state", states[x]}, {"value", rates(x, x)}});
  }
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (!(rates(x, y) >= 0.0) || !std::isfinite(rates(x, y)))
        throw Error(Errc::NegativeRate, "rates must be finite and nonnegative",
                    {{"from", states[x]}, {"to", states[y]}, {"value", rates(x, y)}});
  // A one-way edge cannot satisfy detailed balance with a positive measure.
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if ((rates(x, y) > 0.0) != (rates(y, x) > 0.0))
        throw Error(Errc::DetailedBalanceViolated, "edge support is not symmetric",
                    {{"from", states[x]}, {"to", states[y]}, {"max_relative_violation", 1.0}});
  if (!is_irreducible(rates))
    throw Error(Errc::NotIrreducible, "support graph is not strongly connected");

  const Vector computed = stationary_measure(rates);
  if (pi) {
    if (pi->size() != n) throw Error(Errc::InvalidMeasure, "stationary measure has wrong length");
    if ((pi->array() <= 0.0).any() || std::abs(pi->sum() - 1.0) > 1e-12)
      throw Error(Errc::InvalidMeasure, "stationary measure must be strictly positive with unit mass");
  }
  if (pi) {
    const double diff = (*pi - computed).cwiseAbs().maxCoeff();
    if (diff > kStationaryCrossCheckTol)
      throw Error(Errc::StationaryMismatch, "supplied stationary measure disagrees with the computed one",
                  {{"max_abs_difference", diff}});
  }
  t.states_ = std::move(states);
  t.rates_ = std::move(rates);
  t.pi_ = pi ? *pi : computed;

  const double residual = t.detailed_balance_residual();
  if (residual > kDetailedBalanceTol)
    throw Error(Errc::DetailedBalanceViolated, "detailed balance violated",
                {{"max_relative_violation", residual}});

  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y)
      if (t.rates_(x, y) > 0.0) t.edges_.push_back({x, y, t.rates_(x, y), t.rates_(y, x)});
  return t;
}

int MarkovTriple::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end())
    throw Error(Errc::UnknownState, "unknown state '" + std::string(name) + "'", {{"state", name}});
  return it->second;
}

Matrix MarkovTriple::generator() const {
  Matrix gen = rates_;
  for (int x = 0; x < size(); ++x) gen(x, x) = -rates_.row(x).sum();
  return gen;
}

bool MarkovTriple::is_simple_walk() const {
  return (rates_.array() == 0.0 || rates_.array() == 1.0).all();
}

double MarkovTriple::detailed_balance_residual() const {
  double worst = 0.0;
  for (int x = 0; x < size(); ++x)
    for (int y = 0; y < size(); ++y) {
      const double fxy = pi_(x) * rates_(x, y);
      const double fyx = pi_(y) * rates_(y, x);
      worst = std::max(worst, std::abs(fxy - fyx) / (1.0 + std::abs(fxy)));
    }
  return worst;
}

SubsetMask SubsetMask::from_indices(int n, std::span<const int> indices) {
  std::vector<bool> m(n, false);
  for (int i : indices) {
    if (i < 0 || i >= n) throw Error(Errc::UnknownState, "subset index out of range", {{"index", i}});
    m[i] = true;
  }
  return SubsetMask(std::move(m));
}

SubsetMask SubsetMask::from_names(const MarkovTriple& triple, std::span<const std::string> names) {
  std::vector<bool> m(triple.size(), false);
  for (const auto& s : names) m[triple.index_of(s)] = true;
  return SubsetMask(std::move(m));
}

int SubsetMask::count() const { return static_cast<int>(std::count(member_.begin(), member_.end(), true)); }

std::vector<int> SubsetMask::indices() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (member_[i]) out.push_back(i);
  return out;
}

SubsetMask SubsetMask::complement() const {
  std::vector<bool> m(member_.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = !member_[i];
  return SubsetMask(std::move(m));
}

bool is_connected_subset(const MarkovTriple& triple, const SubsetMask& subset) {
  const auto idx = subset.indices();
  if (idx.empty()) return false;
  std::vector<bool> seen(triple.size(), false);
  std::deque<int> queue{idx.front()};
  seen[idx.front()] = true;
  int visited = 1;
  while (!queue.empty()) {
    const int x = queue.front();
    queue.pop_front();
    for (int y = 0; y < triple.size(); ++y) {
      if (subset.contains(y) && !seen[y] && triple.rate(x, y) > 0.0) {
        seen[y] = true;
        ++visited;
        queue.push_back(y);
      }
    }
  }
  return visited == static_cast<int>(idx.size());
}

MarkovTriple restrict(const MarkovTriple& triple, const SubsetMask& subset) {
  if (subset.size() != triple.size()) throw Error(Errc::InvalidConfig, "subset mask has wrong length");
  const auto idx = subset.indices();
  if (idx.empty()) throw Error(Errc::SubsetEmpty, "subset is empty");
  if (!is_connected_subset(triple, subset)) throw Error(Errc::SubsetNotConnected, "subset is not connected");
  const int m = static_cast<int>(idx.size());
  std::vector<std::string> names;
  Matrix q(m, m);
  Vector pi(m);
  for (int a = 0; a < m; ++a) {
    names.push_back(triple.states()[idx[a]]);
    pi(a) = triple.stationary()(idx[a]);
    for (int b = 0; b < m; ++b) q(a, b) = triple.rate(idx[a], idx[b]);
  }
  pi /= pi.sum();
  // Detailed balance is inherited, so the renormalized restriction is the
  // stationary measure of Q|_Y; validate re-derives and cross-checks it.
  return MarkovTriple::validate(std::move(names), std::move(q), std::move(pi));
}

std::vector<int> neighbors(const MarkovTriple& triple, int x) {
  if (x < 0 || x >= triple.size()) throw Error(Errc::UnknownState, "state index out of range", {{"index", x}});
  std::vector<int> out;
  for (int y = 0; y < triple.size(); ++y)
    if (triple.rate(x, y) > 0.0) out.push_back(y);
  return out;
}

std::vector<std::string> neighbors(const MarkovTriple& triple, std::string_view x) {
  std::vector<std::string> out;
  for (int y : neighbors(triple, triple.index_of(x))) out.push_back(triple.states()[y]);
  return out;
}

void check_probability(const MarkovTriple& triple, const Vector& mu, double tol) {
  if (mu.size() != triple.size()) throw Error(Errc::InvalidMeasure, "measure has wrong length");
  if (!mu.allFinite() || (mu.array() < -tol).any())
    throw Error(Errc::InvalidMeasure, "measure must be finite and nonnegative");
  if (std::abs(mu.sum() - 1.0) > tol)
    throw Error(Errc::InvalidMeasure, "measure must have unit mass", {{"mass", mu.sum()}});
}

}  // namespace disctrans
