#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "disctrans/action.hpp"
#include "disctrans/retraction.hpp"

namespace disctrans {

struct GluedTriple {
  MarkovTriple result;
  /// Glued index of every state of the first and second input.
  std::vector<int> from_first;
  std::vector<int> from_second;
  int star = 0;
  /// max |pi_closed_form - pi_linear_solve|.
  double stationary_discrepancy = 0.0;

  SubsetMask first_image() const;
  SubsetMask second_image() const;
};

/// Identifies x1 in t1 with x2 in t2. States of t1 keep their names and
/// order (the star keeps the name of x1); the rest of t2 follows, renamed
/// with a "'" suffix on collisions. Throws Errc::UnknownAnchor.
GluedTriple glue(const MarkovTriple& t1, std::string_view x1, const MarkovTriple& t2, std::string_view x2);

/// Closed-form stationary measure of the gluing, in glued state order.
Vector glued_stationary(const MarkovTriple& t1, int x1, const MarkovTriple& t2, int x2);

/// |X1 n X2| == 1 and no rate between X1' and X2' in either direction.
bool is_dead_end(const MarkovTriple& triple, const SubsetMask& first, const SubsetMask& second);

/// Moves all mass of X2' = X \ X1 onto the star and drops every momentum
/// touching X2'. Throws Errc::NotADeadEnd.
DiscreteCurve project_dead_end(const MarkovTriple& triple, const DiscreteCurve& curve, const SubsetMask& first,
                               int star);

/// One-sided derivative at 0+ of A((1-a) mu + a nu, (1-a) V + a U) on an
/// n-cycle with states "1".."n" in cyclic order, mu supported on {1, 2} and
/// V on the edge {1, 2}, U(1, 2) = 0. Throws Errc::HypothesisViolated.
double cycle_variation(const MarkovTriple& cycle, const Mean& mean, const Vector& mu, const EdgeField& v,
                       const Vector& nu, const EdgeField& u);

/// (A(mu^a, V^a) - A(mu, V)) / a.
double action_difference_quotient(const MarkovTriple& triple, const Mean& mean, const Vector& mu,
                                  const EdgeField& v, const Vector& nu, const EdgeField& u, double alpha);

// Generators; states are named "1".."n" unless stated otherwise, unit rates.
MarkovTriple cycle_graph(int n);
MarkovTriple path_graph(int n);
MarkovTriple complete_graph(int n);
/// Seeded random tree: vertex i attaches to a uniform earlier vertex.
MarkovTriple random_tree(int n, std::uint64_t seed);
/// Random spanning tree plus each remaining pair with probability p.
MarkovTriple random_connected(int n, double p, std::uint64_t seed);
/// Random reversible rates on a given support: pi and symmetric conductances.
MarkovTriple random_reversible(const MarkovTriple& support, std::uint64_t seed);

struct LatticePatch {
  MarkovTriple triple;
  std::vector<std::vector<int>> coords;
  /// Distinguished subset: empty for grids, the central cell for honeycombs.
  SubsetMask cell;
};

/// Box grid in Z^d with states "v<c0>_<c1>..." in row-major order.
LatticePatch grid_graph(const std::vector<int>& dims);

/// Hexagons with axial distance <= radius from the central cell. Vertex
/// (X, Y) sits at (X/2, Y sqrt(3)/2); states are named "h<X>_<Y>".
LatticePatch honeycomb_patch(int radius);

/// Sector map of a honeycomb patch onto its central cell.
Retraction honeycomb_retraction(const LatticePatch& patch);

/// Fixed-size description used by the CLI and the JSON writer.
struct GraphFamily {
  std::string name;
  std::vector<int> params;
  std::uint64_t seed = 0;
};

/// "cycle", "path", "complete", "grid", "honeycomb", "tree", "random".
MarkovTriple generate(const GraphFamily& family);

}  // namespace disctrans
