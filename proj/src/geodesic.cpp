#include "disctrans/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "disctrans/flow.hpp"

namespace disctrans {

namespace {
constexpr double kInitialMix = 0.1;
}  // namespace

void SolveConfig::validate() const {
  if (time_steps < 1) throw Error(Errc::InvalidConfig, "time_steps must be positive");
  if (smoothing_schedule.empty()) throw Error(Errc::InvalidConfig, "smoothing schedule is empty");
  for (std::size_t j = 0; j < smoothing_schedule.size(); ++j) {
    if (!(smoothing_schedule[j] > 0.0)) throw Error(Errc::InvalidConfig, "smoothing levels must be positive");
    if (j > 0 && !(smoothing_schedule[j] < smoothing_schedule[j - 1]))
      throw Error(Errc::InvalidConfig, "smoothing schedule must be strictly decreasing");
  }
  if (smoothing_schedule.back() < 1e-9) throw Error(Errc::InvalidConfig, "terminal smoothing level below 1e-9");
  if (max_iterations < 1) throw Error(Errc::InvalidConfig, "max_iterations must be positive");
  if (!(feasibility_tol > 0.0) || !(objective_tol > 0.0))
    throw Error(Errc::InvalidConfig, "tolerances must be positive");
}

Vector project_simplex(const Vector& v) {
  const Eigen::Index n = v.size();
  std::vector<double> s(v.data(), v.data() + n);
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    cum += s[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (s[i] - t > 0.0) theta = t;
  }
  Vector out = (v.array() - theta).max(0.0).matrix();
  // Renormalize away the rounding of the threshold.
  const double total = out.sum();
  if (total > 0.0) out /= total;
  return out;
}

namespace {

// Reduced objective over the interior measures mu_1..mu_{N-1}. The momentum
// of every interval is eliminated exactly by a weighted-Laplacian solve, so
// the objective is f = sum_k dt E_k with E_k = r_k^T L_k^+ r_k.
class Reduced {
 public:
  Reduced(const MarkovTriple& triple, const Mean& mean, int steps)
      : triple_(triple), mean_(mean), steps_(steps), dt_(1.0 / steps) {}

  struct Eval {
    double value = 0.0;
    Matrix grad;                // n x (N+1), boundary columns zero
    std::vector<Matrix> diag;   // Hessian blocks (j, j), j = 1..N-1 at index j
    std::vector<Matrix> upper;  // Hessian blocks (j, j+1) at index j
  };

  // Columns 0..N of mu. order 0: value, 1: gradient, 2: Hessian.
  Eval evaluate(const Matrix& mu, double delta, int order) const {
    const int n = triple_.size();
    const auto& edges = triple_.edges();
    const Vector& pi = triple_.stationary();
    Eval out;
    std::vector<double> terms(steps_);
    if (order >= 1) out.grad = Matrix::Zero(n, steps_ + 1);
    if (order >= 2) {
      out.diag.assign(steps_ + 1, Matrix::Zero(n, n));
      out.upper.assign(steps_ + 1, Matrix::Zero(n, n));
    }
    const Matrix avg = Matrix::Constant(n, n, 1.0 / n);
    for (int k = 0; k < steps_; ++k) {
      const Vector nu = 0.5 * (mu.col(k) + mu.col(k + 1)) + delta * pi;
      const Vector r = (mu.col(k) - mu.col(k + 1)) / dt_;
      Matrix lap = Matrix::Zero(n, n);
      Vector m(edges.size());
      for (std::size_t e = 0; e < edges.size(); ++e) {
        const Edge& ed = edges[e];
        m(e) = mean_.eval_unchecked(nu(ed.x) * ed.q_xy, nu(ed.y) * ed.q_yx);
        lap(ed.x, ed.x) += m(e);
        lap(ed.y, ed.y) += m(e);
        lap(ed.x, ed.y) -= m(e);
        lap(ed.y, ed.x) -= m(e);
      }
      // Pseudo-inverse on the sum-zero subspace; weights are positive for delta > 0.
      const Eigen::LDLT<Matrix> fac(lap + avg);
      if (fac.info() != Eigen::Success || !(nu.minCoeff() > 0.0)) {
        out.value = std::numeric_limits<double>::infinity();
        return out;
      }
      Vector p = fac.solve(r);
      p.array() -= p.mean();
      double energy = 0.0;
      Vector gnu = Vector::Zero(n);
      Matrix mrow = Matrix::Zero(n, n);
      Matrix gnunu = Matrix::Zero(n, n);
      for (std::size_t e = 0; e < edges.size(); ++e) {
        const Edge& ed = edges[e];
        const double g = p(ed.x) - p(ed.y);
        energy += m(e) * g * g;
        if (order < 1) continue;
        const double s = nu(ed.x) * ed.q_xy;
        const double t = nu(ed.y) * ed.q_yx;
        const auto [d1, d2] = mean_.partials_unchecked(s, t);
        const double jx = d1 * ed.q_xy;
        const double jy = d2 * ed.q_yx;
        gnu(ed.x) -= g * g * jx;
        gnu(ed.y) -= g * g * jy;
        if (order < 2) continue;
        // Row x of d(gnu)/dp is -2 g J_x b_e^T with b_e = e_x - e_y.
        mrow(ed.x, ed.x) -= 2.0 * g * jx;
        mrow(ed.x, ed.y) += 2.0 * g * jx;
        mrow(ed.y, ed.x) -= 2.0 * g * jy;
        mrow(ed.y, ed.y) += 2.0 * g * jy;
        const double c = mean_.curvature_unchecked(s, t);
        const double ratio = s / t;
        gnunu(ed.x, ed.x) -= g * g * c * ed.q_xy * ed.q_xy;
        gnunu(ed.x, ed.y) += g * g * ratio * c * ed.q_xy * ed.q_yx;
        gnunu(ed.y, ed.x) += g * g * ratio * c * ed.q_xy * ed.q_yx;
        gnunu(ed.y, ed.y) -= g * g * ratio * ratio * c * ed.q_yx * ed.q_yx;
      }
      terms[k] = dt_ * energy;
      if (order < 1) continue;
      // d/d mu_k and d/d mu_{k+1} of dt E_k.
      out.grad.col(k) += 2.0 * p + 0.5 * dt_ * gnu;
      out.grad.col(k + 1) += -2.0 * p + 0.5 * dt_ * gnu;
      if (order < 2) continue;
      Matrix pinv = fac.solve(Matrix::Identity(n, n));
      pinv -= avg;
      const Matrix hrr = 2.0 * pinv;
      const Matrix hrn = pinv * mrow.transpose();
      const Matrix hnn = 0.5 * mrow * pinv * mrow.transpose() + gnunu;
      const double w = 1.0 / (dt_ * dt_);
      const Matrix sym = (hrn + hrn.transpose()) / (2.0 * dt_);
      const Matrix skew = (hrn - hrn.transpose()) / (2.0 * dt_);
      out.diag[k] += dt_ * (w * hrr + sym + 0.25 * hnn);
      out.diag[k + 1] += dt_ * (w * hrr - sym + 0.25 * hnn);
      out.upper[k] += dt_ * (-w * hrr + skew + 0.25 * hnn);
    }
    out.value = pairwise_sum(terms);
    if (order >= 1) {
      out.grad.col(0).setZero();
      out.grad.col(steps_).setZero();
    }
    return out;
  }

 private:
  const MarkovTriple& triple_;
  const Mean& mean_;
  int steps_;
  double dt_;
};

// Sum over interior columns of <g_j, mu_j> - min_x g_j(x); bounds f(mu) - min f.
double frank_wolfe_gap(const Matrix& mu, const Matrix& grad) {
  double gap = 0.0;
  for (int j = 1; j + 1 < mu.cols(); ++j) gap += grad.col(j).dot(mu.col(j)) - grad.col(j).minCoeff();
  return std::max(gap, 0.0);
}

double log_barrier(const Matrix& mu) {
  double s = 0.0;
  for (int j = 1; j + 1 < mu.cols(); ++j) s += mu.col(j).array().log().sum();
  return s;
}

// Newton direction for the block-tridiagonal system restricted to
// sum-zero columns. Returns false if a pivot block is not positive definite.
bool newton_direction(const std::vector<Matrix>& diag, const std::vector<Matrix>& upper, const Matrix& grad,
                      Matrix& dir) {
  const int n = static_cast<int>(grad.rows());
  const int cols = static_cast<int>(grad.cols());
  dir = Matrix::Zero(n, cols);
  if (cols <= 2) return true;
  // Basis of the sum-zero subspace: z_a = e_a - e_{n-1}.
  Matrix z = Matrix::Zero(n, n - 1);
  for (int a = 0; a < n - 1; ++a) {
    z(a, a) = 1.0;
    z(n - 1, a) = -1.0;
  }
  const int m = cols - 2;  // interior blocks 1..cols-2
  std::vector<Eigen::LLT<Matrix>> piv(m);
  std::vector<Matrix> cup(m);
  std::vector<Vector> rhs(m);
  for (int i = 0; i < m; ++i) {
    const int j = i + 1;
    Matrix d = z.transpose() * diag[j] * z;
    rhs[i] = -(z.transpose() * grad.col(j));
    if (i > 0) {
      // Schur complement against the previous pivot.
      const Matrix c = z.transpose() * upper[j - 1] * z;
      d -= c.transpose() * piv[i - 1].solve(c);
      rhs[i] -= c.transpose() * piv[i - 1].solve(rhs[i - 1]);
      cup[i - 1] = c;
    }
    d = 0.5 * (d + d.transpose());
    piv[i].compute(d);
    if (piv[i].info() != Eigen::Success) return false;
  }
  std::vector<Vector> y(m);
  for (int i = m - 1; i >= 0; --i) {
    Vector b = rhs[i];
    if (i + 1 < m) b -= cup[i] * y[i + 1];
    y[i] = piv[i].solve(b);
    dir.col(i + 1) = z * y[i];
  }
  return true;
}

struct StageSettings {
  double delta;
  double tol;
  int max_iter;
  // After the gap test passes, tau is still lowered down to this value.
  double tau_target = 0.0;
};

// Barrier path following: Newton on f - tau * sum log mu, with tau lowered
// until the Frank-Wolfe gap of f itself falls below tol.
SmoothingStage minimize_stage(const Reduced& f, Matrix& mu, double& tau, const StageSettings& cfg) {
  SmoothingStage st;
  st.delta = cfg.delta;
  const int n = static_cast<int>(mu.rows());
  const int interior = static_cast<int>(mu.cols()) - 2;
  const double count = std::max(1, n * interior);
  const double tau_floor = 0.25 * cfg.tol / count;
  int iters = 0;
  while (true) {
    // Centering at the current tau.
    for (; iters < cfg.max_iter; ++iters) {
      const Reduced::Eval ev = f.evaluate(mu, cfg.delta, 2);
      Matrix g = ev.grad;
      std::vector<Matrix> diag = ev.diag;
      for (int j = 1; j <= interior; ++j) {
        g.col(j).array() -= tau / mu.col(j).array();
        diag[j].diagonal().array() += tau / mu.col(j).array().square();
      }
      Matrix dir;
      if (!newton_direction(diag, ev.upper, g, dir)) {
        for (int j = 1; j <= interior; ++j) diag[j].diagonal().array() += 1e-10 * diag[j].diagonal().maxCoeff();
        if (!newton_direction(diag, ev.upper, g, dir)) break;
      }
      const double dec = -(g.cwiseProduct(dir)).sum();
      // Centering runs to stagnation: the gap test below is far less forgiving
      // than the Newton decrement in stiff directions near the endpoints.
      if (dec <= 1e-15 * (1.0 + std::abs(ev.value)) || !(dec > 0.0)) break;
      double step = 1.0;
      for (Eigen::Index i = 0; i < mu.size(); ++i)
        if (dir.data()[i] < 0.0) step = std::min(step, 0.99 * mu.data()[i] / -dir.data()[i]);
      const double phi = ev.value - tau * log_barrier(mu);
      Matrix trial;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        trial = mu + step * dir;
        const double ft = f.evaluate(trial, cfg.delta, 0).value;
        if (std::isfinite(ft) && ft - tau * log_barrier(trial) <= phi - 1e-4 * step * dec) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
      mu = trial;
      // Keep the columns exactly on the affine constraint.
      for (int j = 1; j <= interior; ++j) mu.col(j) /= mu.col(j).sum();
    }
    const Reduced::Eval ev = f.evaluate(mu, cfg.delta, 1);
    st.objective = ev.value;
    st.gap = frank_wolfe_gap(mu, ev.grad);
    st.iterations = iters;
    if (st.gap <= cfg.tol) {
      st.converged = true;
      if (tau <= cfg.tau_target || cfg.tau_target <= 0.0 || iters >= cfg.max_iter) break;
      tau = std::max(0.1 * tau, cfg.tau_target);
      continue;
    }
    if (iters >= cfg.max_iter || tau <= 1e-3 * tau_floor) break;
    tau = std::max(0.1 * tau, 1e-3 * tau_floor);
  }
  return st;
}

}  // namespace

GeodesicResult solve_geodesic(const MarkovTriple& triple, const Mean& mean, const Vector& mu0,
                              const Vector& mu1, const SolveConfig& config) {
  config.validate();
  check_probability(triple, mu0);
  check_probability(triple, mu1);
  const int n = triple.size();
  const int steps = config.time_steps;

  const Vector a = mu0 / mu0.sum();
  const Vector b = mu1 / mu1.sum();
  GeodesicResult res;
  if (a == b) {
    res.curve.grid = uniform_grid(steps);
    res.curve.measures.assign(steps + 1, a);
    res.curve.momenta.assign(steps, EdgeField(n));
    res.trace.push_back({config.smoothing_schedule.back(), 0.0, 0.0, 0, true});
    return res;
  }

  Matrix mu(n, steps + 1);
  for (int k = 0; k <= steps; ++k) {
    const double s = static_cast<double>(k) / steps;
    mu.col(k) = (1.0 - s) * a + s * b;
  }
  if (config.seed != 0 && steps > 1) {
    std::mt19937_64 rng(config.seed);
    std::exponential_distribution<double> expo(1.0);
    for (int k = 1; k < steps; ++k) {
      Vector r(n);
      for (int x = 0; x < n; ++x) r(x) = expo(rng);
      mu.col(k) = 0.9 * mu.col(k) + 0.1 * r / r.sum();
    }
  }
  // The barrier needs strictly positive interior measures.
  for (int k = 1; k < steps; ++k) mu.col(k) = (1.0 - kInitialMix) * mu.col(k) + kInitialMix * triple.stationary();

  const Reduced f(triple, mean, steps);
  double tau = 1e-2 / std::max(1, n * (steps - 1));
  for (double delta : config.smoothing_schedule) {
    const double tol = std::max(config.objective_tol, 0.1 * delta);
    // Entries that vanish at the optimum sit near tau / slope, and the slope
    // can be tiny (a dead end, say): the last stage keeps lowering tau.
    const double tau_target =
        delta == config.smoothing_schedule.back() ? 0.25 * config.feasibility_tol / std::max(1, n * (steps - 1)) : 0.0;
    SmoothingStage st = minimize_stage(f, mu, tau, {delta, tol, config.max_iterations, tau_target});
    if (!st.converged) res.converged = false;
    res.trace.push_back(st);
  }
  res.smoothed_objective = res.trace.back().objective;

  // Momenta of the returned curve are optimal for the unsmoothed problem
  // whenever the zero-smoothing weights admit the flow.
  const double dlast = config.smoothing_schedule.back();
  DiscreteCurve& c = res.curve;
  c.grid = uniform_grid(steps);
  c.measures.resize(steps + 1);
  for (int k = 0; k <= steps; ++k) c.measures[k] = mu.col(k);
  c.momenta.resize(steps);
  for (int k = 0; k < steps; ++k) {
    const Vector mid = 0.5 * (mu.col(k) + mu.col(k + 1));
    const Vector src = -(mu.col(k + 1) - mu.col(k)) * steps;
    IntervalFlow fl = solve_interval_flow(triple, mean, mid, src, 0.0);
    if (!fl.feasible) {
      res.unsmoothed_momentum = false;
      fl = solve_interval_flow(triple, mean, mid, src, dlast);
    }
    c.momenta[k] = flow_to_field(triple, fl.flow);
  }
  res.action = curve_action(triple, mean, c);
  res.distance = std::sqrt(std::max(res.action, 0.0));
  res.residual = continuity_residual(c);
  return res;
}

namespace {

Matrix curve_columns(const DiscreteCurve& curve) {
  Matrix mu(curve.measures.front().size(), curve.steps() + 1);
  for (int k = 0; k <= curve.steps(); ++k) mu.col(k) = curve.measures[k];
  return mu;
}

}  // namespace

std::vector<Vector> reduced_gradient(const MarkovTriple& triple, const Mean& mean, const DiscreteCurve& curve,
                                     double delta) {
  const Reduced f(triple, mean, curve.steps());
  const Reduced::Eval ev = f.evaluate(curve_columns(curve), delta, 1);
  std::vector<Vector> out;
  if (!std::isfinite(ev.value)) throw Error(Errc::InvalidCurve, "reduced objective is infinite on this curve");
  for (int j = 1; j < curve.steps(); ++j) out.push_back(ev.grad.col(j));
  return out;
}

std::vector<Vector> interval_potentials(const MarkovTriple& triple, const Mean& mean, const DiscreteCurve& curve,
                                        double delta) {
  std::vector<Vector> out;
  for (int k = 0; k < curve.steps(); ++k) {
    const Vector mid = 0.5 * (curve.measures[k] + curve.measures[k + 1]);
    const Vector src = -(curve.measures[k + 1] - curve.measures[k]) / curve.dt(k);
    out.push_back(solve_interval_flow(triple, mean, mid, src, delta).potential);
  }
  return out;
}

namespace {

int grid_index(double t, int steps) {
  const double k = std::round(t * steps);
  if (t < 0.0 || t > 1.0 || std::abs(k - t * steps) > 1e-9 * steps)
    throw Error(Errc::InvalidConfig, "probe time is not a grid point", {{"t", t}, {"steps", steps}});
  return static_cast<int>(k);
}

}  // namespace

double constant_speed_check(const MarkovTriple& triple, const Mean& mean, const GeodesicResult& result,
                            std::span<const std::pair<double, double>> probes, const SolveConfig& config) {
  const int steps = result.curve.steps();
  const double w = result.distance;
  double worst = 0.0;
  for (const auto& [s, t] : probes) {
    const int ks = grid_index(s, steps);
    const int kt = grid_index(t, steps);
    const double target = std::abs(t - s) * w;
    // The whole curve, or an empty piece of it.
    if (std::abs(ks - kt) == steps || ks == kt) continue;
    const GeodesicResult sub =
        solve_geodesic(triple, mean, result.curve.measures[ks], result.curve.measures[kt], config);
    if (w > 0.0)
      worst = std::max(worst, std::abs(sub.distance - target) / w);
    else
      worst = std::max(worst, sub.distance);
  }
  return worst;
}

DiscreteCurve zero_extend(const MarkovTriple& triple, const SubsetMask& subset, const DiscreteCurve& curve) {
  const std::vector<int> idx = subset.indices();
  const int n = triple.size();
  DiscreteCurve out;
  out.grid = curve.grid;
  for (const Vector& m : curve.measures) {
    Vector full = Vector::Zero(n);
    for (std::size_t a = 0; a < idx.size(); ++a) full(idx[a]) = m(static_cast<Eigen::Index>(a));
    out.measures.push_back(full);
  }
  for (const EdgeField& v : curve.momenta) {
    EdgeField full(n);
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b) full(idx[a], idx[b]) = v(static_cast<int>(a), static_cast<int>(b));
    out.momenta.push_back(full);
  }
  return out;
}

DiscreteCurve reverse_curve(const DiscreteCurve& curve) {
  DiscreteCurve out;
  const double horizon = curve.grid.back();
  for (auto it = curve.grid.rbegin(); it != curve.grid.rend(); ++it) out.grid.push_back(horizon - *it);
  out.measures.assign(curve.measures.rbegin(), curve.measures.rend());
  for (auto it = curve.momenta.rbegin(); it != curve.momenta.rend(); ++it)
    out.momenta.push_back(EdgeField(Matrix(-it->values())));
  return out;
}

namespace {

Vector restrict_measure(const SubsetMask& subset, const Vector& mu) {
  const std::vector<int> idx = subset.indices();
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t a = 0; a < idx.size(); ++a) out(static_cast<Eigen::Index>(a)) = mu(idx[a]);
  return out;
}

}  // namespace

LocalityComparison restricted_vs_full_cost(const MarkovTriple& triple, const SubsetMask& subset, const Mean& mean,
                                           const Vector& mu0, const Vector& mu1, const SolveConfig& config) {
  if (subset.size() != triple.size() || !is_connected_subset(triple, subset))
    throw Error(Errc::SubsetNotConnected, "subset must be nonempty and connected");
  check_probability(triple, mu0);
  check_probability(triple, mu1);
  for (int x = 0; x < triple.size(); ++x)
    if (!subset.contains(x) && (mu0(x) != 0.0 || mu1(x) != 0.0))
      throw Error(Errc::SupportLeak, "endpoint has mass outside the subset", {{"state", triple.states()[x]}});

  LocalityComparison out;
  const MarkovTriple sub = restrict(triple, subset);
  out.restricted = solve_geodesic(sub, mean, restrict_measure(subset, mu0), restrict_measure(subset, mu1), config);
  out.full = solve_geodesic(triple, mean, mu0, mu1, config);
  out.lifted = zero_extend(triple, subset, out.restricted.curve);
  out.lifted_action = curve_action(triple, mean, out.lifted);
  out.distance_restricted = out.restricted.distance;
  out.distance_full = out.full.distance;
  return out;
}

}  // namespace disctrans
