#include "disctrans/action.hpp"

#include <cmath>
#include <limits>

namespace disctrans {

bool EdgeField::is_antisymmetric(double tol) const {
  return (values_ + values_.transpose()).cwiseAbs().maxCoeff() <= tol;
}

double EdgeField::off_support(const MarkovTriple& triple) const {
  double worst = 0.0;
  for (int x = 0; x < size(); ++x)
    for (int y = 0; y < size(); ++y)
      if (triple.rate(x, y) == 0.0) worst = std::max(worst, std::abs(values_(x, y)));
  return worst;
}

EdgeField EdgeField::antisymmetric_part() const {
  return EdgeField(Matrix(0.5 * (values_ - values_.transpose())));
}

EdgeField gradient(const MarkovTriple& triple, const Vector& phi) {
  EdgeField g(triple.size());
  for (const Edge& e : triple.edges()) {
    g(e.x, e.y) = phi(e.y) - phi(e.x);
    g(e.y, e.x) = phi(e.x) - phi(e.y);
  }
  return g;
}

Vector divergence(const EdgeField& field) {
  const Matrix& v = field.values();
  return 0.5 * (v.rowwise().sum() - v.colwise().sum().transpose());
}

double edge_inner(const EdgeField& a, const EdgeField& b) {
  return 0.5 * a.values().cwiseProduct(b.values()).sum();
}

EdgeField weighted_mean(const MarkovTriple& triple, const Mean& mean, const Vector& mu) {
  EdgeField w(triple.size());
  for (const Edge& e : triple.edges()) {
    const double v = mean.eval(mu(e.x) * e.q_xy, mu(e.y) * e.q_yx);
    w(e.x, e.y) = v;
    w(e.y, e.x) = v;
  }
  return w;
}

double norm_sq(const MarkovTriple& triple, const Mean& mean, const Vector& mu, const EdgeField& field) {
  return edge_inner(field, EdgeField(Matrix(field.values().cwiseProduct(weighted_mean(triple, mean, mu).values()))));
}

double action_value(const MarkovTriple& triple, const Mean& mean, const Vector& mu, const EdgeField& momentum) {
  const int n = triple.size();
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n) * n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      const double w = momentum(x, y);
      if (w == 0.0) continue;
      const double a = action_integrand(mean, mu(x) * triple.rate(x, y), mu(y) * triple.rate(y, x), w);
      if (std::isinf(a)) return std::numeric_limits<double>::infinity();
      terms.push_back(a);
    }
  return 0.5 * pairwise_sum(terms);
}

Vector DiscreteCurve::measure_at(double t) const {
  if (t <= grid.front()) return measures.front();
  if (t >= grid.back()) return measures.back();
  std::size_t k = 0;
  while (k + 1 < grid.size() && grid[k + 1] < t) ++k;
  const double a = (t - grid[k]) / (grid[k + 1] - grid[k]);
  return (1.0 - a) * measures[k] + a * measures[k + 1];
}

std::vector<double> uniform_grid(int n, double horizon) {
  std::vector<double> g(n + 1);
  for (int k = 0; k <= n; ++k) g[k] = horizon * static_cast<double>(k) / n;
  return g;
}

void check_curve(const MarkovTriple& triple, const DiscreteCurve& curve, double mass_tol) {
  const std::size_t n = curve.momenta.size();
  if (n == 0 || curve.grid.size() != n + 1 || curve.measures.size() != n + 1)
    throw Error(Errc::InvalidCurve, "curve needs N+1 grid points, N+1 measures and N momenta",
                {{"grid", curve.grid.size()}, {"measures", curve.measures.size()}, {"momenta", n}});
  const double dt0 = curve.grid[1] - curve.grid[0];
  for (std::size_t k = 0; k < n; ++k) {
    const double dt = curve.grid[k + 1] - curve.grid[k];
    if (!(dt > 0.0) || std::abs(dt - dt0) > 1e-9 * std::max(1.0, dt0))
      throw Error(Errc::InvalidCurve, "curve grid must be uniform and increasing");
  }
  for (const Vector& mu : curve.measures) {
    try {
      check_probability(triple, mu, mass_tol);
    } catch (const Error& e) {
      throw Error(Errc::InvalidCurve, std::string("invalid measure on curve: ") + e.what());
    }
  }
  for (const EdgeField& v : curve.momenta) {
    if (v.size() != triple.size()) throw Error(Errc::InvalidCurve, "momentum has wrong dimension");
    const double scale = std::max(1.0, v.values().cwiseAbs().maxCoeff());
    if (!v.is_antisymmetric(1e-12 * scale))
      throw Error(Errc::NotAntisymmetric, "momenta must be antisymmetric");
    if (v.off_support(triple) > 0.0) throw Error(Errc::InvalidCurve, "momentum is nonzero off the edge set");
  }
}

double curve_action(const MarkovTriple& triple, const Mean& mean, const DiscreteCurve& curve) {
  std::vector<double> terms(curve.momenta.size());
  for (std::size_t k = 0; k < curve.momenta.size(); ++k) {
    const Vector mid = 0.5 * (curve.measures[k] + curve.measures[k + 1]);
    const double a = action_value(triple, mean, mid, curve.momenta[k]);
    if (std::isinf(a)) return std::numeric_limits<double>::infinity();
    terms[k] = curve.dt(static_cast<int>(k)) * a;
  }
  return pairwise_sum(terms);
}

double continuity_residual(const DiscreteCurve& curve) {
  double worst = 0.0;
  for (std::size_t k = 0; k < curve.momenta.size(); ++k) {
    const double dt = curve.dt(static_cast<int>(k));
    const Vector r = (curve.measures[k + 1] - curve.measures[k]) / dt + divergence(curve.momenta[k]);
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

Vector dirac(int n, int x) {
  Vector d = Vector::Zero(n);
  d(x) = 1.0;
  return d;
}

}  // namespace disctrans
