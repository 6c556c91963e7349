#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "disctrans/markov.hpp"

namespace disctrans {

/// A failed rate comparison: sum_{x' in T^-1(y')} Q(x, x') > Q(y, y') with T(x) = y.
struct RetractionViolation {
  int x;
  int y;
  int y_prime;
  double lhs;
  double rhs;
};

/// Candidate map T: X -> Y, given as one image index per state of X.
struct Retraction {
  SubsetMask subset;
  std::vector<int> map;
  bool verified = false;
  /// States of Y moved by T.
  std::vector<int> fixed_point_failures;
  std::vector<RetractionViolation> violations;
};

/// Checks that T fixes Y and that the rates out of x, summed over each
/// fibre T^-1(y'), stay below Q(T(x), y'). Integer-valued rates are compared exactly, other
/// rates with tolerance 1e-12 relative. Throws Errc::MapNotIntoSubset.
Retraction verify_retraction(const MarkovTriple& triple, Retraction candidate);

/// Graph form of the retraction property for {0,1} rates:
///  T fixes Y; adjacent x, x' have equal or adjacent images; and if two
///  distinct neighbours of x share an image, x has that image too.
/// Throws Errc::NotSimpleWalk.
bool verify_simple_characterization(const MarkovTriple& triple, const Retraction& candidate);

enum class SearchStatus { Found, ProvedAbsent, BudgetExhausted };

struct SearchResult {
  SearchStatus status = SearchStatus::BudgetExhausted;
  std::optional<Retraction> retraction;
  std::uint64_t nodes = 0;
};

/// Depth-first search over maps fixing Y, states ordered by BFS distance
/// from Y and pruned on partial fibre sums. `budget` bounds visited nodes.
SearchResult find_retraction(const MarkovTriple& triple, const SubsetMask& subset,
                             std::uint64_t budget = 10'000'000);

/// Brute-force enumeration of all |Y|^|X \ Y| maps, no pruning.
bool retraction_exists_exhaustive(const MarkovTriple& triple, const SubsetMask& subset);

/// Retraction of the n-cycle (states "1".."n" in order) onto {1..k}:
/// j -> j (j <= k), 2k - j + 1 (k < j <= 2k), 1 otherwise.
/// Throws Errc::NoRetraction when 2k > n.
Retraction cycle_retraction(const MarkovTriple& cycle, int k);

/// Coordinate clamp onto the box lo <= v <= hi for a subgraph of Z^d.
/// `coords` gives the lattice point of every state. Throws Errc::EmptyRectangle.
Retraction grid_retraction(const MarkovTriple& triple, std::span<const std::vector<int>> coords,
                           std::span<const int> lo, std::span<const int> hi);

/// Each state maps to the first vertex of Y on its path towards Y.
/// Throws Errc::NotATree, Errc::NotASubtree.
Retraction tree_retraction(const MarkovTriple& tree, const SubsetMask& subtree, int anchor = -1);

/// T^-1(x) = side_x and T^-1(y) = complement, for an edge {x, y}.
/// Throws Errc::InvalidCut.
Retraction cut_retraction(const MarkovTriple& triple, int x, int y, const SubsetMask& side_x);

/// Restriction of a retraction of X onto Y to X' with Y inside X'; indices
/// in the result refer to restrict(triple, outer).
/// Throws Errc::SubsetOrderViolated.
Retraction restrict_retraction(const MarkovTriple& triple, const Retraction& t, const SubsetMask& outer);

/// Push-forward T_# nu.
Vector pushforward(const Retraction& t, const Vector& nu);

}  // namespace disctrans
