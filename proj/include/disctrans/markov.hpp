#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "disctrans/error.hpp"

namespace disctrans {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Undirected edge {x, y} with x < y and both directed rates positive.
struct Edge {
  int x;
  int y;
  double q_xy;
  double q_yx;
};

inline constexpr double kDetailedBalanceTol = 1e-12;
inline constexpr double kStationaryCrossCheckTol = 1e-10;

/// A finite, irreducible, reversible Markov chain together with its
/// stationary measure. Instances only exist in validated form.
class MarkovTriple {
 public:
  /// Empty placeholder; only validate() yields a usable triple.
  MarkovTriple() = default;

  /// Checks the structural assumptions and attaches the stationary measure.
  /// A supplied `pi` is cross-checked against the computed one.
  static MarkovTriple validate(std::vector<std::string> states, Matrix rates,
                               std::optional<Vector> pi = std::nullopt);

  int size() const { return static_cast<int>(states_.size()); }
  const std::vector<std::string>& states() const { return states_; }
  const Matrix& rates() const { return rates_; }
  double rate(int x, int y) const { return rates_(x, y); }
  const Vector& stationary() const { return pi_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Throws Errc::UnknownState.
  int index_of(std::string_view name) const;
  bool adjacent(int x, int y) const { return rates_(x, y) > 0.0; }

  /// Generator L with L(x,y) = Q(x,y) off the diagonal and zero row sums.
  Matrix generator() const;

  /// True when every rate is 0 or 1.
  bool is_simple_walk() const;

  /// Max over pairs of |pi(x)Q(x,y) - pi(y)Q(y,x)| / (1 + |pi(x)Q(x,y)|).
  double detailed_balance_residual() const;

 private:

  std::vector<std::string> states_;
  std::unordered_map<std::string, int> index_;
  Matrix rates_;
  Vector pi_;
  std::vector<Edge> edges_;
};

/// Boolean membership vector over the states of a parent triple.
class SubsetMask {
 public:
  SubsetMask() = default;
  explicit SubsetMask(std::vector<bool> member) : member_(std::move(member)) {}

  static SubsetMask full(int n) { return SubsetMask(std::vector<bool>(n, true)); }
  static SubsetMask from_indices(int n, std::span<const int> indices);
  static SubsetMask from_names(const MarkovTriple& triple, std::span<const std::string> names);

  int size() const { return static_cast<int>(member_.size()); }
  bool contains(int x) const { return member_[x]; }
  void set(int x, bool value) { member_[x] = value; }
  int count() const;
  /// Member indices in ascending order.
  std::vector<int> indices() const;
  SubsetMask complement() const;

  bool operator==(const SubsetMask&) const = default;

 private:
  std::vector<bool> member_;
};

/// Unique pi with pi^T L = 0, sum 1; direct linear solve.
/// Throws Errc::NotIrreducible.
Vector stationary_measure(const Matrix& rates);

/// True if the support digraph is strongly connected (BFS in input order).
bool is_irreducible(const Matrix& rates);

/// True if the subset is nonempty and connected through in-subset edges.
bool is_connected_subset(const MarkovTriple& triple, const SubsetMask& subset);

/// (Y, Q|_Y, normalized pi|_Y); states kept in parent order.
MarkovTriple restrict(const MarkovTriple& triple, const SubsetMask& subset);

/// States y with Q(x,y) > 0, ascending.
std::vector<int> neighbors(const MarkovTriple& triple, int x);
std::vector<std::string> neighbors(const MarkovTriple& triple, std::string_view x);

/// Validates a probability vector over the triple's states (nonnegative, sums to 1).
void check_probability(const MarkovTriple& triple, const Vector& mu, double tol = 1e-9);

}  // namespace disctrans
