#pragma once

#include <span>
#include <vector>

#include "disctrans/markov.hpp"
#include "disctrans/means.hpp"

namespace disctrans {

/// Real field on ordered state pairs, stored as a dense square matrix.
class EdgeField {
 public:
  EdgeField() = default;
  explicit EdgeField(int n) : values_(Matrix::Zero(n, n)) {}
  explicit EdgeField(Matrix values) : values_(std::move(values)) {}

  int size() const { return static_cast<int>(values_.rows()); }
  double operator()(int x, int y) const { return values_(x, y); }
  double& operator()(int x, int y) { return values_(x, y); }
  const Matrix& values() const { return values_; }

  bool is_antisymmetric(double tol = 0.0) const;
  /// Largest |values(x,y)| over pairs with Q(x,y) == 0.
  double off_support(const MarkovTriple& triple) const;
  /// (V - V^T) / 2.
  EdgeField antisymmetric_part() const;

 private:
  Matrix values_;
};

/// grad phi(x, y) = phi(y) - phi(x) on edges, zero elsewhere.
EdgeField gradient(const MarkovTriple& triple, const Vector& phi);

/// div Phi(x) = 1/2 sum_y (Phi(x, y) - Phi(y, x)).
Vector divergence(const EdgeField& field);

/// <<Phi, Psi>> = 1/2 sum_{x,y} Phi(x,y) Psi(x,y).
double edge_inner(const EdgeField& a, const EdgeField& b);

/// mu_hat(x, y) = Lambda(mu(x) Q(x, y), mu(y) Q(y, x)), zero off support.
EdgeField weighted_mean(const MarkovTriple& triple, const Mean& mean, const Vector& mu);

/// ||Phi||_mu^2 = <<Phi, Phi * mu_hat>>.
double norm_sq(const MarkovTriple& triple, const Mean& mean, const Vector& mu, const EdgeField& field);

/// 1/2 sum_{x,y} A(mu(x)Q(x,y), mu(y)Q(y,x), V(x,y)); may be +inf.
double action_value(const MarkovTriple& triple, const Mean& mean, const Vector& mu, const EdgeField& momentum);

/// Piecewise-linear measures on a uniform grid with piecewise-constant
/// antisymmetric momenta, one per interval.
struct DiscreteCurve {
  std::vector<double> grid;
  std::vector<Vector> measures;
  std::vector<EdgeField> momenta;

  int steps() const { return static_cast<int>(momenta.size()); }
  double dt(int k) const { return grid[k + 1] - grid[k]; }
  /// Measure at the grid point closest to time t (linear interpolation).
  Vector measure_at(double t) const;
};

/// Uniform grid of n+1 points on [0, horizon].
std::vector<double> uniform_grid(int n, double horizon = 1.0);

/// Structural checks: grid, lengths, probability vectors, antisymmetry.
/// Throws Errc::InvalidCurve / NotAntisymmetric.
void check_curve(const MarkovTriple& triple, const DiscreteCurve& curve, double mass_tol = 1e-9);

/// sum_k dt * A(mid_k, V_k) with mid_k the arithmetic midpoint measure.
double curve_action(const MarkovTriple& triple, const Mean& mean, const DiscreteCurve& curve);

/// max_{k,x} |(mu_{k+1}(x) - mu_k(x)) / dt + div V_k(x)|.
double continuity_residual(const DiscreteCurve& curve);

/// Deterministic pairwise (tree) summation.
double pairwise_sum(std::span<const double> values);

Vector dirac(int n, int x);

}  // namespace disctrans
