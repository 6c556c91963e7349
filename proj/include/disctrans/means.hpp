#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace disctrans {

enum class MeanKind { Logarithmic, Harmonic, Geometric, Arithmetic, Custom };

/// An admissible mean: symmetric, 1-homogeneous, monotone, jointly concave,
/// with value 1 at (1, 1). Built-in kinds have closed-form partials.
class Mean {
 public:
  using EvalFn = std::function<double(double, double)>;
  using PartialsFn = std::function<std::pair<double, double>(double, double)>;

  static Mean logarithmic() { return Mean(MeanKind::Logarithmic); }
  static Mean harmonic() { return Mean(MeanKind::Harmonic); }
  static Mean geometric() { return Mean(MeanKind::Geometric); }
  static Mean arithmetic() { return Mean(MeanKind::Arithmetic); }
  /// Without `partials`, derivatives come from central differences with
  /// relative step kCustomPartialStep.
  static Mean custom(std::string name, EvalFn eval, std::optional<PartialsFn> partials = std::nullopt);

  /// Parses "log", "harmonic", "geometric", "arithmetic" (and long forms).
  static Mean parse(std::string_view name);

  MeanKind kind() const { return kind_; }
  std::string name() const;

  /// Value at (s, t), s, t >= 0. Throws Errc::NegativeInput.
  double operator()(double s, double t) const { return eval(s, t); }
  double eval(double s, double t) const;
  /// Same as eval without the input check; used on hot paths.
  double eval_unchecked(double s, double t) const;

  /// (d/ds, d/dt) at s, t > 0. Throws Errc::BoundaryPoint on the boundary.
  std::pair<double, double> partials(double s, double t) const;
  std::pair<double, double> partials_unchecked(double s, double t) const;

  /// d^2/ds^2 at s, t > 0. By homogeneity the mixed and t-t second
  /// derivatives are -(s/t) and (s/t)^2 times this value.
  double curvature_unchecked(double s, double t) const;

 private:
  explicit Mean(MeanKind kind) : kind_(kind) {}

  MeanKind kind_;
  std::string custom_name_;
  EvalFn custom_eval_;
  std::optional<PartialsFn> custom_partials_;
};

inline constexpr double kCustomPartialStep = 1e-6;

double eval_mean(const Mean& mean, double s, double t);
std::pair<double, double> mean_partials(const Mean& mean, double s, double t);

/// A(s, t, w): w^2 / Lambda(s, t) if Lambda > 0, 0 if w == 0, +inf otherwise.
double action_integrand(const Mean& mean, double s, double t, double w);

struct BoundaryGrowth {
  bool satisfied = false;
  /// Built-in kinds are decided exactly; custom means by the numerical ladder.
  bool heuristic = false;
};

/// Growth condition Lambda(s, t) -> inf as t -> inf, checked on the doubling
/// ladder t = 2^k, k <= 60.
BoundaryGrowth check_boundary_growth(const Mean& mean);

}  // namespace disctrans
