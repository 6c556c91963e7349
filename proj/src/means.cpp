#include "disctrans/means.hpp"

#include <cmath>
#include <limits>

#include "disctrans/error.hpp"

namespace disctrans {

namespace {

constexpr double kSeriesCutoff = 0.05;
constexpr double kAtanhCutoff = 0.5;

// h(u) = u / atanh(u), so that Lambda_log(s, t) = (s + t)/2 * h((s - t)/(s + t)).
double log_ratio_factor(double u) {
  const double u2 = u * u;
  if (std::abs(u) < kSeriesCutoff)
    return 1.0 + u2 * (-1.0 / 3 + u2 * (-4.0 / 45 + u2 * (-44.0 / 945 + u2 * (-428.0 / 14175 + u2 * (-10196.0 / 467775)))));
  return u / std::atanh(u);
}

double log_ratio_factor_derivative(double u) {
  const double u2 = u * u;
  if (std::abs(u) < kSeriesCutoff)
    return u * (-2.0 / 3 + u2 * (-16.0 / 45 + u2 * (-88.0 / 315 + u2 * (-3424.0 / 14175 + u2 * (-20392.0 / 93555)))));
  const double a = std::atanh(u);
  return (a - u / (1.0 - u2)) / (a * a);
}

double log_ratio_factor_second(double u, double s, double t) {
  const double u2 = u * u;
  if (std::abs(u) < kSeriesCutoff)
    return -2.0 / 3 + u2 * (-16.0 / 15 + u2 * (-88.0 / 63 + u2 * (-3424.0 / 2025 + u2 * (-20392.0 / 10395))));
  const double a = 0.5 * (std::log(s) - std::log(t));
  const double da = 1.0 / (1.0 - u2);
  const double dda = 2.0 * u * da * da;
  return (-u * dda * a - 2.0 * da * (a - u * da)) / (a * a * a);
}

double log_mean(double s, double t) {
  if (s == 0.0 || t == 0.0) return 0.0;
  if (s == t) return s;
  const double u = (s - t) / (s + t);
  if (std::abs(u) < kAtanhCutoff) return 0.5 * (s + t) * log_ratio_factor(u);
  return (s - t) / (std::log(s) - std::log(t));
}

std::pair<double, double> log_mean_partials(double s, double t) {
  const double u = (s - t) / (s + t);
  if (std::abs(u) < kAtanhCutoff) {
    const double h = log_ratio_factor(u);
    const double dh = log_ratio_factor_derivative(u);
    return {0.5 * (h + (1.0 - u) * dh), 0.5 * (h - (1.0 + u) * dh)};
  }
  const double l = std::log(s) - std::log(t);
  const double lam = (s - t) / l;
  return {(1.0 - lam / s) / l, (lam / t - 1.0) / l};
}

}  // namespace

Mean Mean::custom(std::string name, EvalFn eval, std::optional<PartialsFn> partials) {
  Mean m(MeanKind::Custom);
  m.custom_name_ = std::move(name);
  m.custom_eval_ = std::move(eval);
  m.custom_partials_ = std::move(partials);
  return m;
}

Mean Mean::parse(std::string_view name) {
  if (name == "log" || name == "logarithmic") return logarithmic();
  if (name == "harmonic" || name == "har") return harmonic();
  if (name == "geometric" || name == "geo") return geometric();
  if (name == "arithmetic" || name == "ari") return arithmetic();
  throw Error(Errc::InvalidConfig, "unknown mean '" + std::string(name) + "'");
}

std::string Mean::name() const {
  switch (kind_) {
    case MeanKind::Logarithmic: return "log";
    case MeanKind::Harmonic: return "harmonic";
    case MeanKind::Geometric: return "geometric";
    case MeanKind::Arithmetic: return "arithmetic";
    case MeanKind::Custom: return custom_name_;
  }
  return "?";
}

double Mean::eval(double s, double t) const {
  if (s < 0.0 || t < 0.0 || std::isnan(s) || std::isnan(t))
    throw Error(Errc::NegativeInput, "mean arguments must be nonnegative", {{"s", s}, {"t", t}});
  return eval_unchecked(s, t);
}

double Mean::eval_unchecked(double s, double t) const {
  switch (kind_) {
    case MeanKind::Logarithmic: return log_mean(s, t);
    case MeanKind::Harmonic: return (s + t) > 0.0 ? 2.0 * s * t / (s + t) : 0.0;
    case MeanKind::Geometric: return std::sqrt(s * t);
    case MeanKind::Arithmetic: return 0.5 * (s + t);
    case MeanKind::Custom: return custom_eval_(s, t);
  }
  return 0.0;
}

std::pair<double, double> Mean::partials(double s, double t) const {
  if (std::isnan(s) || std::isnan(t) || s < 0.0 || t < 0.0)
    throw Error(Errc::NegativeInput, "mean arguments must be nonnegative", {{"s", s}, {"t", t}});
  if (s == 0.0 || t == 0.0)
    throw Error(Errc::BoundaryPoint, "partials are undefined on the boundary", {{"s", s}, {"t", t}});
  return partials_unchecked(s, t);
}

std::pair<double, double> Mean::partials_unchecked(double s, double t) const {
  switch (kind_) {
    case MeanKind::Logarithmic: return log_mean_partials(s, t);
    case MeanKind::Harmonic: {
      const double d = (s + t) * (s + t);
      return {2.0 * t * t / d, 2.0 * s * s / d};
    }
    case MeanKind::Geometric: {
      const double r = std::sqrt(t / s);
      return {0.5 * r, 0.5 / r};
    }
    case MeanKind::Arithmetic: return {0.5, 0.5};
    case MeanKind::Custom: {
      if (custom_partials_) return (*custom_partials_)(s, t);
      const double hs = kCustomPartialStep * s;
      const double ht = kCustomPartialStep * t;
      return {(custom_eval_(s + hs, t) - custom_eval_(s - hs, t)) / (2.0 * hs),
              (custom_eval_(s, t + ht) - custom_eval_(s, t - ht)) / (2.0 * ht)};
    }
  }
  return {0.0, 0.0};
}

double Mean::curvature_unchecked(double s, double t) const {
  switch (kind_) {
    case MeanKind::Logarithmic: {
      const double sum = s + t;
      const double u = (s - t) / sum;
      return 2.0 * t * t * log_ratio_factor_second(u, s, t) / (sum * sum * sum);
    }
    case MeanKind::Harmonic: {
      const double sum = s + t;
      return -4.0 * t * t / (sum * sum * sum);
    }
    case MeanKind::Geometric: return -0.25 * std::sqrt(t / s) / s;
    case MeanKind::Arithmetic: return 0.0;
    case MeanKind::Custom: {
      const double hs = 1e-4 * s;
      return (partials_unchecked(s + hs, t).first - partials_unchecked(s - hs, t).first) / (2.0 * hs);
    }
  }
  return 0.0;
}

double eval_mean(const Mean& mean, double s, double t) { return mean.eval(s, t); }

std::pair<double, double> mean_partials(const Mean& mean, double s, double t) { return mean.partials(s, t); }

double action_integrand(const Mean& mean, double s, double t, double w) {
  if (w == 0.0) return 0.0;
  const double lam = mean.eval(s, t);
  if (lam > 0.0) return w * w / lam;
  return std::numeric_limits<double>::infinity();
}

BoundaryGrowth check_boundary_growth(const Mean& mean) {
  auto diverges = [&](double s) {
    double prev = mean.eval(s, 1.0);
    for (int k = 1; k <= 60; ++k) {
      const double v = mean.eval(s, std::ldexp(1.0, k));
      if (!(v >= prev)) return false;
      prev = v;
    }
    const double mid = mean.eval(s, std::ldexp(1.0, 30));
    return prev > 1e6 && prev > 4.0 * mid;
  };
  BoundaryGrowth out;
  out.heuristic = mean.kind() == MeanKind::Custom;
  out.satisfied = diverges(1.0);
  if (out.satisfied && mean.eval(0.0, 1.0) > 0.0) out.satisfied = diverges(0.0);
  return out;
}

}  // namespace disctrans
