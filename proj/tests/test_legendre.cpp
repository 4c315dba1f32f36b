#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "tma/error.hpp"
#include "tma/legendre.hpp"
#include "tma/ma_measure.hpp"
#include "tma/predicates.hpp"

using namespace tma;

namespace {

long node_at(const GridFunction& g, Vec2 p) {
  for (std::size_t k = 0; k < g.size(); ++k)
    if (norm(g.node(k) - p) < 1e-12) return static_cast<long>(k);
  return -1;
}

// Random convex function on an n x n lattice: max of random planes plus a
// small quadratic, sampled exactly.
GridFunction random_convex(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::array<double, 3>> planes;
  for (int k = 0; k < 6; ++k) planes.push_back({u(rng), u(rng), u(rng)});
  const double q = 0.5 + 0.5 * u(rng);
  const double h = 2.0 / (n - 1);
  return sample(
      [=](Vec2 x) {
        double m = -1e300;
        for (const auto& p : planes) m = std::max(m, p[0] * x.x + p[1] * x.y + p[2]);
        return scale * (m + q * norm2(x));
      },
      Domain2D::square(1.0 + 1e-9), h);
}

// Brute-force lower envelope of the graph points, evaluated at each node.
std::vector<double> brute_envelope(const GridFunction& u) {
  const PLConvexFunction f = lower_envelope(u.nodes(), u.values());
  std::vector<double> out;
  for (Vec2 x : u.nodes()) out.push_back(*f.evaluate(x));
  return out;
}

}  // namespace

TEST_CASE("self-dual quadratic") {
  const GridFunction u = sample([](Vec2 x) { return 0.5 * norm2(x); }, Domain2D::square(2.0), 0.25);
  const ConjugateResult c = legendre_transform(u, Domain2D::square(1.0), 0.5);
  const long k = node_at(c.dual, {0.5, 0.0});
  REQUIRE(k >= 0);
  CHECK(c.dual.value(k) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(norm(u.node(c.argmax[k]) - Vec2{0.5, 0.0}) < 1e-12);
}

TEST_CASE("conjugate of an affine function at its own slope") {
  const GridFunction u = sample([](Vec2 x) { return x.x + 2.0 * x.y; }, Domain2D::square(1.0), 0.25);
  const ConjugateResult c = legendre_transform(u, Domain2D::square(2.0), 1.0);
  const long k = node_at(c.dual, {1.0, 2.0});
  REQUIRE(k >= 0);
  CHECK(c.dual.value(k) == 0.0);
}

TEST_CASE("cone conjugate vanishes on the unit disk") {
  const GridFunction u = sample([](Vec2 x) { return norm(x); }, Domain2D::square(1.0), 0.05);
  const ConjugateResult c = legendre_transform(u, Domain2D::square(0.6), 0.1);
  const long k = node_at(c.dual, {0.3, 0.0});
  REQUIRE(k >= 0);
  CHECK(std::abs(c.dual.value(k)) <= 1e-12);
  // brute-force reference over all nodes
  double best = -1e300;
  for (std::size_t i = 0; i < u.size(); ++i)
    best = std::max(best, conjugate_candidate({0.3, 0.0}, u.node(i), u.value(i)));
  CHECK(std::abs(best) <= 1e-12);
}

TEST_CASE("collinear primal nodes are rejected") {
  const Domain2D thin = Domain2D::polygon({{-1, -0.01}, {1, -0.01}, {1, 0.01}, {-1, 0.01}});
  const GridFunction u = sample([](Vec2 x) { return x.x * x.x; }, thin, 0.5);
  try {
    legendre_transform(u, Domain2D::square(1.0), 0.5);
    FAIL("expected DegenerateInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_input);
  }
}

TEST_CASE("fast conjugate equals brute force on random grids") {
  std::mt19937_64 rng(17);
  for (int n : {3, 7, 12, 25, 40}) {
    for (int trial = 0; trial < 3; ++trial) {
      const GridFunction u = random_convex(rng, n, trial == 2 ? 8.0 : 1.0);
      const double hd = 0.07 + 0.05 * trial;
      const Domain2D dd = default_dual_domain(u, hd);
      const ConjugateResult fast = legendre_transform(u, dd, hd, ConjugateMethod::separable);
      const ConjugateResult slow = legendre_transform(u, dd, hd, ConjugateMethod::brute_force);
      CHECK(fast.argmax == slow.argmax);
      CHECK(fast.dual.values() == slow.dual.values());
    }
  }
}

TEST_CASE("fast conjugate equals brute force on non-convex and disk grids") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  GridFunction u = sample([](Vec2 x) { return norm2(x); }, Domain2D::disk(1.0), 0.06);
  std::vector<double> v = u.values();
  for (double& x : v) x += 0.3 * noise(rng);
  u = u.with_values(v);
  const Domain2D dd = Domain2D::disk(3.0);
  const ConjugateResult fast = legendre_transform(u, dd, 0.1);
  const ConjugateResult slow = legendre_transform(u, dd, 0.1, ConjugateMethod::brute_force);
  CHECK(fast.argmax == slow.argmax);
  CHECK(fast.dual.values() == slow.dual.values());
}

TEST_CASE("Fenchel-Young holds exactly with equality at the argmax") {
  std::mt19937_64 rng(29);
  const GridFunction u = random_convex(rng, 15);
  const ConjugateResult c = legendre_transform(u, default_dual_domain(u, 0.2), 0.2);
  for (std::size_t d = 0; d < c.dual.size(); ++d) {
    const Vec2 y = c.dual.node(d);
    const std::size_t a = c.argmax[d];
    CHECK(c.dual.value(d) == conjugate_candidate(y, u.node(a), u.value(a)));
    for (std::size_t k = 0; k < u.size(); ++k) {
      // <y, x_a> - u(x_a) >= <y, x_k> - u(x_k), decided without rounding
      const int s = compare_affine(y, u.node(a), u.value(a), u.node(k), u.value(k));
      CHECK(s >= 0);
      if (s == 0) CHECK(a <= k);
    }
  }
}

TEST_CASE("order reversal") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> bump(0.0, 0.5);
  for (int trial = 0; trial < 5; ++trial) {
    const GridFunction u = random_convex(rng, 12);
    std::vector<double> w = u.values();
    for (double& x : w) x += bump(rng);
    const GridFunction v = u.with_values(w);
    const Domain2D dd = default_dual_domain(u, 0.15);
    const GridFunction us = legendre_transform(u, dd, 0.15).dual;
    const GridFunction vs = legendre_transform(v, dd, 0.15).dual;
    for (std::size_t d = 0; d < us.size(); ++d) CHECK(us.value(d) >= vs.value(d));
  }
}

TEST_CASE("dual is convex") {
  std::mt19937_64 rng(37);
  const GridFunction u = random_convex(rng, 20);
  const GridFunction us = legendre_transform(u, default_dual_domain(u, 0.1), 0.1).dual;
  const PLConvexFunction f = lower_envelope(us.nodes(), us.values());
  for (std::size_t k = 0; k < us.size(); ++k) {
    const bool on_envelope = f.active(k) || std::abs(*f.evaluate(us.node(k)) - us.value(k)) <= 1e-12;
    CHECK(on_envelope);
  }
}

TEST_CASE("biconjugate of a convex quadratic") {
  const double h_dual = 0.05;
  const Domain2D d = Domain2D::square(1.0);
  const GridFunction u = sample([](Vec2 x) { return 0.5 * norm2(x); }, d, 0.1);
  const GridFunction bb = biconjugate(u, h_dual);
  for (std::size_t k = 0; k < u.size(); ++k) {
    CHECK(bb.value(k) <= u.value(k));
    CHECK(u.value(k) - bb.value(k) <= 2.0 * h_dual * d.diameter());
  }
}

TEST_CASE("biconjugate of a double well is its envelope") {
  const double a = 0.5;
  const GridFunction u = sample(
      [=](Vec2 x) { return std::min(norm(x - Vec2{a, 0}), norm(x + Vec2{a, 0})); },
      Domain2D::square(1.0), 0.1);
  const double h_dual = 0.01;
  const GridFunction bb = biconjugate(u, h_dual);
  const std::vector<double> env = brute_envelope(u);
  for (std::size_t k = 0; k < u.size(); ++k) {
    CHECK(bb.value(k) <= u.value(k));
    CHECK(std::abs(bb.value(k) - env[k]) <= 2.0 * h_dual * u.domain().diameter());
  }
  const long mid = node_at(u, {0.0, 0.0});
  REQUIRE(mid >= 0);
  CHECK(bb.value(mid) < u.value(mid) - 0.25);
}

TEST_CASE("lowering one node changes the envelope only near it") {
  const GridFunction u = sample([](Vec2 x) { return 0.5 * norm2(x); }, Domain2D::square(2.0), 0.2);
  std::vector<double> w = u.values();
  const long c = node_at(u, {0.4, -0.2});
  REQUIRE(c >= 0);
  w[c] -= 1.0;
  const GridFunction v = u.with_values(w);
  const std::vector<double> env_u = brute_envelope(u), env_v = brute_envelope(v);
  const GridFunction bb = biconjugate(v, 0.02);
  double far_change = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    CHECK(std::abs(bb.value(k) - env_v[k]) <= 2.0 * 0.02 * v.domain().diameter());
    // lowering by 1 at c only reaches nodes within sqrt(2) of it
    if (norm(v.node(k) - v.node(c)) > 1.5) far_change = std::max(far_change, env_u[k] - env_v[k]);
  }
  CHECK(far_change == 0.0);
  CHECK(env_v[c] == doctest::Approx(w[c]).epsilon(1e-14));
}

TEST_CASE("biconjugation is idempotent on nodes") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> noise(0.0, 0.2);
  for (int trial = 0; trial < 6; ++trial) {
    GridFunction u = random_convex(rng, 9 + 3 * trial);
    std::vector<double> v = u.values();
    for (double& x : v) x += noise(rng);
    u = u.with_values(v);
    const double hd = 0.05 + 0.02 * trial;
    const GridFunction once = biconjugate(u, hd);
    const GridFunction twice = biconjugate(once, hd);
    CHECK(twice.values() == once.values());
    for (std::size_t k = 0; k < u.size(); ++k) CHECK(once.value(k) <= u.value(k));
  }
}
