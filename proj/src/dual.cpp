#include "disctrans/dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace disctrans {

Vector HJPotential::time_derivative(int k) const {
  return (values[k + 1] - values[k]) / (grid[k + 1] - grid[k]);
}

HJPotential HJPotential::zero(int n, int intervals, double horizon) {
  HJPotential p;
  p.grid = uniform_grid(intervals, horizon);
  p.values.assign(intervals + 1, Vector::Zero(n));
  return p;
}

namespace {

// Edge coefficients c_e = (G(x,y)^2 + G(y,x)^2) / 2, so that
// ||G||_mu^2 = sum_e c_e Lambda(mu_x q_xy, mu_y q_yx).
Vector edge_weights(const MarkovTriple& triple, const EdgeField& g) {
  const auto& edges = triple.edges();
  Vector c(static_cast<Eigen::Index>(edges.size()));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double a = g(edges[e].x, edges[e].y);
    const double b = g(edges[e].y, edges[e].x);
    c(static_cast<Eigen::Index>(e)) = 0.5 * (a * a + b * b);
  }
  return c;
}

double eval_h(const MarkovTriple& triple, const Mean& mean, const Vector& a, const Vector& c, const Vector& mu) {
  double v = a.dot(mu);
  const auto& edges = triple.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double ce = c(static_cast<Eigen::Index>(e));
    if (ce == 0.0) continue;
    v += 0.5 * ce * mean.eval_unchecked(mu(edges[e].x) * edges[e].q_xy, mu(edges[e].y) * edges[e].q_yx);
  }
  return v;
}

Vector grad_h(const MarkovTriple& triple, const Mean& mean, const Vector& a, const Vector& c, const Vector& mu) {
  Vector g = a;
  const auto& edges = triple.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double ce = c(static_cast<Eigen::Index>(e));
    if (ce == 0.0) continue;
    const Edge& ed = edges[e];
    const auto [d1, d2] = mean.partials_unchecked(mu(ed.x) * ed.q_xy, mu(ed.y) * ed.q_yx);
    g(ed.x) += 0.5 * ce * d1 * ed.q_xy;
    g(ed.y) += 0.5 * ce * d2 * ed.q_yx;
  }
  return g;
}

Matrix hess_h(const MarkovTriple& triple, const Mean& mean, const Vector& c, const Vector& mu) {
  const int n = triple.size();
  Matrix h = Matrix::Zero(n, n);
  const auto& edges = triple.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double ce = c(static_cast<Eigen::Index>(e));
    if (ce == 0.0) continue;
    const Edge& ed = edges[e];
    const double s = mu(ed.x) * ed.q_xy;
    const double t = mu(ed.y) * ed.q_yx;
    const double k = 0.5 * ce * mean.curvature_unchecked(s, t);
    const double r = s / t;
    h(ed.x, ed.x) += k * ed.q_xy * ed.q_xy;
    h(ed.x, ed.y) -= k * r * ed.q_xy * ed.q_yx;
    h(ed.y, ed.x) -= k * r * ed.q_xy * ed.q_yx;
    h(ed.y, ed.y) += k * r * r * ed.q_yx * ed.q_yx;
  }
  return h;
}

}  // namespace

double hamiltonian(const MarkovTriple& triple, const Mean& mean, const Vector& phidot, const EdgeField& grad_phi,
                   const Vector& mu) {
  return eval_h(triple, mean, phidot, edge_weights(triple, grad_phi), mu);
}

HamiltonianMax hj_violation(const MarkovTriple& triple, const Mean& mean, const Vector& phidot,
                            const EdgeField& grad_phi) {
  const int n = triple.size();
  const Vector c = edge_weights(triple, grad_phi);
  HamiltonianMax out;

  // Vertex values are exact and can beat the interior iterate when the
  // maximum sits at a corner.
  int best_vertex = 0;
  double vertex_value = -std::numeric_limits<double>::infinity();
  for (int x = 0; x < n; ++x) {
    const double v = eval_h(triple, mean, phidot, c, dirac(n, x));
    if (v > vertex_value) {
      vertex_value = v;
      best_vertex = x;
    }
  }
  if (n == 1) {
    out.value = out.upper = vertex_value;
    out.witness = dirac(1, 0);
    return out;
  }

  // Barrier Newton ascent on F + tau sum log mu over the simplex interior.
  Matrix z = Matrix::Zero(n, n - 1);
  for (int i = 0; i < n - 1; ++i) {
    z(i, i) = 1.0;
    z(n - 1, i) = -1.0;
  }
  const double scale = 1.0 + phidot.cwiseAbs().maxCoeff() + c.sum();
  Vector mu = Vector::Constant(n, 1.0 / n);
  double tau = 1e-2 * scale / n;
  const double tau_min = 1e-15 * scale / n;
  auto barrier = [&](const Vector& m) { return eval_h(triple, mean, phidot, c, m) + tau * m.array().log().sum(); };
  while (true) {
    for (int it = 0; it < 100; ++it) {
      Vector g = grad_h(triple, mean, phidot, c, mu);
      g.array() += tau / mu.array();
      Matrix h = hess_h(triple, mean, c, mu);
      h.diagonal().array() -= tau / mu.array().square();
      const Matrix hz = -(z.transpose() * h * z);
      const Eigen::LDLT<Matrix> fac(hz);
      if (fac.info() != Eigen::Success) break;
      const Vector d = z * fac.solve(z.transpose() * g);
      const double dec = g.dot(d);
      if (!(dec > 1e-16 * scale)) break;
      double step = 1.0;
      for (int x = 0; x < n; ++x)
        if (d(x) < 0.0) step = std::min(step, 0.99 * mu(x) / -d(x));
      const double b0 = barrier(mu);
      bool ok = false;
      for (int ls = 0; ls < 60; ++ls) {
        const Vector trial = mu + step * d;
        if (trial.minCoeff() > 0.0 && barrier(trial) >= b0 + 1e-4 * step * dec) {
          mu = trial / trial.sum();
          ok = true;
          break;
        }
        step *= 0.5;
      }
      if (!ok) break;
    }
    if (tau <= tau_min) break;
    tau = std::max(0.1 * tau, tau_min);
  }

  out.value = eval_h(triple, mean, phidot, c, mu);
  out.upper = grad_h(triple, mean, phidot, c, mu).maxCoeff();
  out.witness = mu;
  if (vertex_value > out.value) {
    out.value = vertex_value;
    out.witness = dirac(n, best_vertex);
  }
  out.upper = std::max(out.upper, out.value);
  return out;
}

HJCertificate is_hj_subsolution(const MarkovTriple& triple, const Mean& mean, const HJPotential& phi, double tol) {
  HJCertificate cert;
  cert.max_violation = -std::numeric_limits<double>::infinity();
  cert.upper_bound = -std::numeric_limits<double>::infinity();
  std::vector<EdgeField> grads;
  for (const Vector& v : phi.values) grads.push_back(gradient(triple, v));
  for (int k = 0; k < phi.intervals(); ++k) {
    const Vector a = phi.time_derivative(k);
    const HamiltonianMax left = hj_violation(triple, mean, a, grads[k]);
    const HamiltonianMax right = hj_violation(triple, mean, a, grads[k + 1]);
    const HamiltonianMax& worse = left.value >= right.value ? left : right;
    cert.interval_values.push_back(worse.value);
    cert.interval_upper.push_back(std::max(left.upper, right.upper));
    cert.witnesses.push_back(worse.witness);
    cert.max_violation = std::max(cert.max_violation, worse.value);
    cert.upper_bound = std::max(cert.upper_bound, cert.interval_upper.back());
  }
  if (phi.intervals() == 0) cert.max_violation = cert.upper_bound = 0.0;
  cert.subsolution = cert.max_violation <= tol;
  return cert;
}

double dual_value(const HJPotential& phi, const Vector& mu0, const Vector& mu1) {
  return phi.values.back().dot(mu1) - phi.values.front().dot(mu0);
}

namespace {

// Below this interval mass the flow potential carries no information.
constexpr double kDormantMass = 1e-6;

// Replaces values off `active` by the unit-weight harmonic extension of the
// active ones.
void harmonic_fill(const MarkovTriple& triple, const Eigen::Array<bool, Eigen::Dynamic, 1>& active, Vector& v) {
  const int n = triple.size();
  std::vector<int> free;
  std::vector<int> slot(n, -1);
  for (int x = 0; x < n; ++x)
    if (!active(x)) {
      slot[x] = static_cast<int>(free.size());
      free.push_back(x);
    }
  if (free.empty() || static_cast<int>(free.size()) == n) return;
  const int m = static_cast<int>(free.size());
  Matrix a = Matrix::Zero(m, m);
  Vector b = Vector::Zero(m);
  for (const Edge& e : triple.edges()) {
    for (auto [x, y] : {std::pair{e.x, e.y}, std::pair{e.y, e.x}}) {
      if (slot[x] < 0) continue;
      a(slot[x], slot[x]) += 1.0;
      if (slot[y] >= 0) a(slot[x], slot[y]) -= 1.0;
      else b(slot[x]) += v(y);
    }
  }
  // Every free component touches an active vertex, so the system is regular.
  const Vector sol = a.ldlt().solve(b);
  for (int i = 0; i < m; ++i) v(free[i]) = sol(i);
}

}  // namespace

HJPotential potential_from_curve(const MarkovTriple& triple, const Mean& mean, const DiscreteCurve& curve,
                                 double delta) {
  const int steps = curve.steps();
  const std::vector<Vector> p = interval_potentials(triple, mean, curve, delta);
  std::vector<Vector> grad;
  try {
    grad = reduced_gradient(triple, mean, curve, delta);
  } catch (const Error&) {
    grad = reduced_gradient(triple, mean, curve, std::max(delta, 1e-12));
  }
  // Interval values -p_k, shifted so that the node equations hold on average.
  std::vector<Vector> psi(steps);
  double shift = 0.0;
  for (int k = 0; k < steps; ++k) {
    if (k > 0) shift += 0.5 * grad[k - 1].dot(curve.measures[k]);
    psi[k] = -p[k];
    psi[k].array() += shift;
    const Vector mid = 0.5 * (curve.measures[k] + curve.measures[k + 1]);
    harmonic_fill(triple, mid.array() > kDormantMass, psi[k]);
  }
  HJPotential phi;
  phi.grid = curve.grid;
  phi.values.resize(steps + 1);
  if (steps == 1) {
    phi.values[0] = phi.values[1] = psi[0];
    return phi;
  }
  phi.values[0] = psi[0] - 0.5 * (psi[1] - psi[0]);
  for (int j = 1; j < steps; ++j) phi.values[j] = 0.5 * (psi[j - 1] + psi[j]);
  phi.values[steps] = psi[steps - 1] + 0.5 * (psi[steps - 1] - psi[steps - 2]);
  return phi;
}

HJPotential repair_subsolution(const MarkovTriple& triple, const Mean& mean, const HJPotential& phi) {
  const HJCertificate cert = is_hj_subsolution(triple, mean, phi);
  HJPotential out = phi;
  double g = 0.0;
  for (int k = 0; k < phi.intervals(); ++k) {
    g += (phi.grid[k + 1] - phi.grid[k]) * std::max(0.0, cert.interval_upper[k]);
    out.values[k + 1].array() -= g;
  }
  return out;
}

namespace {

// Supergradient of D(phi) - sum_k dt_k max(0, upper_k(phi)) with respect to
// the node values, using the interval witnesses.
std::vector<Vector> penalized_supergradient(const MarkovTriple& triple, const Mean& mean, const HJPotential& phi,
                                            const HJCertificate& cert, const Vector& mu0, const Vector& mu1) {
  const int m = phi.intervals();
  const int n = triple.size();
  std::vector<Vector> sg(m + 1, Vector::Zero(n));
  sg[0] -= mu0;
  sg[m] += mu1;
  for (int k = 0; k < m; ++k) {
    if (cert.interval_values[k] <= 0.0) continue;
    const double dt = phi.grid[k + 1] - phi.grid[k];
    const Vector& w = cert.witnesses[k];
    // Which endpoint gradient attains the interval maximum.
    const Vector a = phi.time_derivative(k);
    const double left = hamiltonian(triple, mean, a, gradient(triple, phi.values[k]), w);
    const double right = hamiltonian(triple, mean, a, gradient(triple, phi.values[k + 1]), w);
    const int j = left >= right ? k : k + 1;
    // d/dphi_j of 1/2 sum_e (phi_y - phi_x)^2 m_e(w) is L(w) phi_j.
    Vector lp = Vector::Zero(n);
    for (const Edge& e : triple.edges()) {
      const double me = mean.eval_unchecked(w(e.x) * e.q_xy, w(e.y) * e.q_yx);
      const double d = phi.values[j](e.x) - phi.values[j](e.y);
      lp(e.x) += me * d;
      lp(e.y) -= me * d;
    }
    sg[k + 1] -= w;
    sg[k] += w;
    sg[j] -= dt * lp;
  }
  return sg;
}

}  // namespace

DualResult solve_dual(const MarkovTriple& triple, const Mean& mean, const Vector& mu0, const Vector& mu1,
                      const DualConfig& config) {
  DualResult res;
  const GeodesicResult primal = solve_geodesic(triple, mean, mu0, mu1, config.primal);
  res.primal_action = primal.action;
  HJPotential phi = potential_from_curve(triple, mean, primal.curve);
  HJPotential best = repair_subsolution(triple, mean, phi);
  double best_value = dual_value(best, mu0, mu1);
  // Potentials of a geodesic between endpoints pulled slightly towards pi are
  // informative on vertices the exact geodesic never reaches.
  for (double eps : config.endpoint_mixing) {
    const Vector& pi = triple.stationary();
    const GeodesicResult mixed =
        solve_geodesic(triple, mean, (1 - eps) * mu0 + eps * pi, (1 - eps) * mu1 + eps * pi, config.primal);
    const HJPotential cand = potential_from_curve(triple, mean, mixed.curve);
    const HJPotential repaired = repair_subsolution(triple, mean, cand);
    const double v = dual_value(repaired, mu0, mu1);
    if (v > best_value) {
      best_value = v;
      best = repaired;
      phi = cand;
    }
  }
  // Polish with diminishing supergradient steps; every iterate is repaired, so
  // the best value is always certified.
  double step = 1e-2;
  for (int it = 0; it < config.max_iterations; ++it) {
    const HJCertificate cert = is_hj_subsolution(triple, mean, phi);
    const std::vector<Vector> sg = penalized_supergradient(triple, mean, phi, cert, mu0, mu1);
    double norm = 0.0;
    for (const Vector& v : sg) norm += v.squaredNorm();
    if (norm == 0.0) break;
    const double scale = step / std::sqrt(norm) / std::sqrt(1.0 + it);
    for (std::size_t j = 0; j < sg.size(); ++j) phi.values[j] += scale * sg[j];
    const HJPotential repaired = repair_subsolution(triple, mean, phi);
    const double v = dual_value(repaired, mu0, mu1);
    res.iterations = it + 1;
    if (v > best_value) {
      best_value = v;
      best = repaired;
    }
  }
  res.potential = best;
  res.certificate = is_hj_subsolution(triple, mean, best, config.tol);
  res.max_violation = res.certificate.max_violation;
  res.lower_bound = best_value;
  return res;
}

HJPotential scale_subsolution(const HJPotential& phi, double lambda) {
  if (!(lambda > 0.0)) throw Error(Errc::InvalidConfig, "scaling factor must be positive", {{"lambda", lambda}});
  HJPotential out;
  for (double t : phi.grid) out.grid.push_back(lambda * t);
  for (const Vector& v : phi.values) out.values.push_back(v / lambda);
  return out;
}

ExtendedPotential extend_subsolution(const MarkovTriple& triple, const Mean& mean, const HJPotential& phi_y,
                                     const Retraction& t, double tol) {
  if (!t.verified || static_cast<int>(t.map.size()) != triple.size())
    throw Error(Errc::NotARetraction, "extension needs a verified retraction");
  const MarkovTriple sub = restrict(triple, t.subset);
  const HJCertificate base = is_hj_subsolution(sub, mean, phi_y, tol);
  if (!base.subsolution)
    throw Error(Errc::UncertifiedInput, "potential on the subset is not a certified subsolution",
                {{"max_violation", base.max_violation}});
  const std::vector<int> idx = t.subset.indices();
  std::vector<int> local(triple.size(), -1);
  for (std::size_t a = 0; a < idx.size(); ++a) local[idx[a]] = static_cast<int>(a);
  ExtendedPotential out;
  out.potential.grid = phi_y.grid;
  for (const Vector& v : phi_y.values) {
    Vector full(triple.size());
    for (int x = 0; x < triple.size(); ++x) full(x) = v(local[t.map[x]]);
    out.potential.values.push_back(full);
  }
  out.certificate = is_hj_subsolution(triple, mean, out.potential, tol);
  return out;
}

}  // namespace disctrans
