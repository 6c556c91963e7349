#include <doctest.h>

#include <cmath>
#include <random>

#include "disctrans/constructions.hpp"
#include "disctrans/dual.hpp"
#include "support.hpp"

using namespace disctrans;
using testing::throws;
using testing::vec;

namespace {

Vector random_probability(int n, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = e(rng);
  return v / v.sum();
}

DualConfig dual_steps(int n) {
  DualConfig c;
  c.primal.time_steps = n;
  return c;
}

// Certified subsolution on a small triple: a scaled-down repaired potential
// from a random perturbation.
HJPotential random_subsolution(const MarkovTriple& t, const Mean& m, std::mt19937_64& rng, int intervals) {
  std::normal_distribution<double> g(0.0, 1.0);
  HJPotential phi = HJPotential::zero(t.size(), intervals);
  for (Vector& v : phi.values)
    for (int x = 0; x < t.size(); ++x) v(x) = g(rng);
  return repair_subsolution(t, m, phi);
}

}  // namespace

TEST_CASE("Hamiltonian maximum with zero gradient is the largest time derivative") {
  const MarkovTriple k3 = complete_graph(3);
  const Mean m = Mean::logarithmic();
  const HamiltonianMax a = hj_violation(k3, m, vec({-1.0, 0.5, 0.2}), EdgeField(3));
  CHECK(a.value == doctest::Approx(0.5));
  CHECK(a.witness(1) == doctest::Approx(1.0));
  const HamiltonianMax b = hj_violation(k3, m, vec({-2.0, -2.0, -2.0}), EdgeField(3));
  CHECK(b.value == doctest::Approx(-2.0));
  CHECK(b.upper == doctest::Approx(-2.0));
}

TEST_CASE("Hamiltonian maximum agrees with a dense grid search on three states") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (const Mean& m : {Mean::logarithmic(), Mean::geometric(), Mean::harmonic()})
    for (int trial = 0; trial < 4; ++trial) {
      const MarkovTriple t = random_reversible(complete_graph(3), trial);
      const Vector phidot = vec({g(rng), g(rng), g(rng)});
      const EdgeField grad = gradient(t, vec({g(rng), g(rng), g(rng)}));
      const HamiltonianMax h = hj_violation(t, m, phidot, grad);
      // Grid with step 1e-3, then zoom around the best point (the objective is
      // concave, and steep near the boundary for the logarithmic mean).
      const int steps = 1000;
      double best = -1e300, bi = 0, bj = 0;
      auto probe = [&](double a, double b) {
        if (a < 0 || b < 0 || a + b > 1) return;
        const double v = hamiltonian(t, m, phidot, grad, vec({a, b, 1 - a - b}));
        if (v > best) best = v, bi = a, bj = b;
      };
      for (int i = 0; i <= steps; ++i)
        for (int j = 0; i + j <= steps; ++j) probe(double(i) / steps, double(j) / steps);
      for (double h = 1e-4; h >= 1e-9; h /= 10) {
        const double ci = bi, cj = bj;
        for (int a = -20; a <= 20; ++a)
          for (int b = -20; b <= 20; ++b) probe(ci + a * h, cj + b * h);
      }
      CHECK(h.value >= best - 1e-5);
      CHECK(h.value <= best + 1e-5);
      CHECK(h.upper >= h.value - 1e-12);
      CHECK(hamiltonian(t, m, phidot, grad, h.witness) == doctest::Approx(h.value).epsilon(1e-12));
    }
}

TEST_CASE("Hamiltonian at a Dirac measure") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (const Mean& m : {Mean::logarithmic(), Mean::arithmetic()}) {
    const MarkovTriple t = random_reversible(cycle_graph(5), 4);
    Vector phidot(5), phi(5);
    for (int x = 0; x < 5; ++x) phidot(x) = g(rng), phi(x) = g(rng);
    const EdgeField grad = gradient(t, phi);
    for (int x = 0; x < 5; ++x) {
      double closed = phidot(x);
      for (int y : neighbors(t, x)) closed += 0.5 * std::pow(phi(y) - phi(x), 2) * m(t.rate(x, y), 0.0);
      CHECK(hamiltonian(t, m, phidot, grad, dirac(5, x)) == doctest::Approx(closed).epsilon(1e-12));
    }
  }
}

TEST_CASE("simple subsolutions") {
  const MarkovTriple c4 = cycle_graph(4);
  const Mean m = Mean::logarithmic();
  const HJCertificate zero = is_hj_subsolution(c4, m, HJPotential::zero(4, 8));
  CHECK(zero.subsolution);
  CHECK(zero.max_violation == doctest::Approx(0.0));

  HJPotential down = HJPotential::zero(4, 8);
  for (int k = 0; k <= 8; ++k) down.values[k].setConstant(-down.grid[k]);
  const HJCertificate cd = is_hj_subsolution(c4, m, down);
  CHECK(cd.subsolution);
  CHECK(cd.max_violation == doctest::Approx(-1.0));

  HJPotential up = down;
  for (Vector& v : up.values) v = -v;
  CHECK_FALSE(is_hj_subsolution(c4, m, up).subsolution);
}

TEST_CASE("spatial constants do not change the certificate") {
  std::mt19937_64 rng(8);
  const MarkovTriple t = random_reversible(path_graph(4), 2);
  const Mean m = Mean::logarithmic();
  const HJPotential phi = random_subsolution(t, m, rng, 6);
  HJPotential shifted = phi;
  for (Vector& v : shifted.values) v.array() += 3.5;
  const HJCertificate a = is_hj_subsolution(t, m, phi);
  const HJCertificate b = is_hj_subsolution(t, m, shifted);
  CHECK(a.max_violation == doctest::Approx(b.max_violation).epsilon(1e-9).scale(1.0));
}

TEST_CASE("dual value") {
  const Vector mu0 = vec({0.2, 0.8}), mu1 = vec({0.6, 0.4});
  CHECK(dual_value(HJPotential::zero(2, 4), mu0, mu1) == 0.0);
  HJPotential still = HJPotential::zero(2, 4);
  for (Vector& v : still.values) v = vec({1.0, -2.0});
  CHECK(dual_value(still, mu0, mu1) == doctest::Approx(vec({1.0, -2.0}).dot(mu1 - mu0)));
  HJPotential shifted = still;
  for (Vector& v : shifted.values) v.array() += 7.0;
  CHECK(dual_value(shifted, mu0, mu1) == doctest::Approx(dual_value(still, mu0, mu1)));
}

TEST_CASE("dual bracket on the two-chain") {
  const MarkovTriple chain = path_graph(2);
  const Mean m = Mean::logarithmic();
  const DualResult d = solve_dual(chain, m, dirac(2, 0), dirac(2, 1), dual_steps(128));
  CHECK(d.certificate.subsolution);
  CHECK(d.lower_bound <= 0.5 * d.primal_action);
  CHECK((0.5 * d.primal_action - d.lower_bound) / (0.5 * d.primal_action) <= 0.05);
}

TEST_CASE("dual of equal endpoints is zero") {
  const MarkovTriple k3 = complete_graph(3);
  const DualResult d = solve_dual(k3, Mean::logarithmic(), dirac(3, 0), dirac(3, 0), dual_steps(16));
  CHECK(d.lower_bound >= -1e-12);
  CHECK(d.lower_bound <= 1e-12);
}

TEST_CASE("dual certifies the triangle shortcut") {
  const Mean m = Mean::logarithmic();
  const DualResult edge = solve_dual(path_graph(2), m, dirac(2, 0), dirac(2, 1), dual_steps(128));
  const GeodesicResult tri = solve_geodesic(complete_graph(3), m, dirac(3, 0), dirac(3, 1), dual_steps(128).primal);
  // Upper bound on the triangle distance below the certified lower bound of the edge.
  CHECK(0.5 * tri.action < edge.lower_bound);
}

TEST_CASE("weak duality on random instances") {
  std::mt19937_64 rng(21);
  const Mean m = Mean::logarithmic();
  for (int i = 0; i < 10; ++i) {
    const MarkovTriple t = random_reversible(random_connected(4, 0.5, i), i);
    const Vector a = random_probability(4, rng), b = random_probability(4, rng);
    const HJPotential phi = random_subsolution(t, m, rng, 16);
    REQUIRE(is_hj_subsolution(t, m, phi).subsolution);
    SolveConfig cfg;
    cfg.time_steps = 16;
    const GeodesicResult r = solve_geodesic(t, m, a, b, cfg);
    CHECK(dual_value(phi, a, b) <= 0.5 * r.action + kCertificationTol);
  }
}

TEST_CASE("scaling") {
  std::mt19937_64 rng(4);
  const MarkovTriple t = random_reversible(cycle_graph(4), 3);
  const Mean m = Mean::logarithmic();
  const HJPotential phi = random_subsolution(t, m, rng, 8);
  const HJPotential same = scale_subsolution(phi, 1.0);
  CHECK(same.grid == phi.grid);
  for (std::size_t k = 0; k < phi.values.size(); ++k) CHECK(same.values[k] == phi.values[k]);
  const HJPotential twice = scale_subsolution(phi, 2.0);
  CHECK(twice.horizon() == doctest::Approx(2.0));
  CHECK(is_hj_subsolution(t, m, twice).subsolution);
  const HJPotential zero = scale_subsolution(HJPotential::zero(4, 4), 3.0);
  for (const Vector& v : zero.values) CHECK(v.isZero());
  CHECK(throws(Errc::InvalidConfig, [&] { scale_subsolution(phi, 0.0); }));
}

TEST_CASE("extension through the cycle retraction") {
  std::mt19937_64 rng(5);
  const MarkovTriple c9 = cycle_graph(9);
  const Mean m = Mean::logarithmic();
  const Retraction r = cycle_retraction(c9, 4);
  const MarkovTriple sub = restrict(c9, r.subset);

  const ExtendedPotential zero = extend_subsolution(c9, m, HJPotential::zero(4, 4), r);
  for (const Vector& v : zero.potential.values) CHECK(v.isZero());

  const HJPotential phi = random_subsolution(sub, m, rng, 8);
  const ExtendedPotential ext = extend_subsolution(c9, m, phi, r);
  CHECK(ext.certificate.subsolution);
  for (std::size_t k = 0; k < phi.values.size(); ++k)
    for (int a = 0; a < 4; ++a) CHECK(ext.potential.values[k](a) == phi.values[k](a));

  Retraction bogus = r;
  bogus.verified = false;
  CHECK(throws(Errc::NotARetraction, [&] { extend_subsolution(c9, m, phi, bogus); }));
  HJPotential up = HJPotential::zero(4, 2);
  up.values[2].setConstant(1.0);
  CHECK(throws(Errc::UncertifiedInput, [&] { extend_subsolution(c9, m, up, r); }));
}

TEST_CASE("pushforward identity and norm inequality") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1.0);
  const MarkovTriple c9 = cycle_graph(9);
  const Retraction r = cycle_retraction(c9, 4);
  const MarkovTriple sub = restrict(c9, r.subset);
  for (const Mean& m : {Mean::logarithmic(), Mean::geometric(), Mean::harmonic(), Mean::arithmetic()})
    for (int i = 0; i < 200; ++i) {
      const Vector nu = random_probability(9, rng);
      Vector phi(4);
      for (int a = 0; a < 4; ++a) phi(a) = g(rng);
      Vector lifted(9);
      for (int x = 0; x < 9; ++x) lifted(x) = phi(r.map[x]);
      const Vector push = pushforward(r, nu);
      CHECK(lifted.dot(nu) == doctest::Approx(phi.dot(push.head(4))).epsilon(1e-13));
      const double lhs = norm_sq(c9, m, nu, gradient(c9, lifted));
      const double rhs = norm_sq(sub, m, push.head(4), gradient(sub, phi));
      CHECK(lhs <= rhs * (1 + 1e-12) + 1e-14);
    }
}
