#include <doctest.h>

#include <cmath>
#include <random>

#include "json.hpp"
#include "tma/error.hpp"
#include "tma/oracle.hpp"
#include "tma/solver.hpp"

using namespace tma;

namespace {

const Field kQuadratic = [](Vec2 x) { return 0.5 * norm2(x); };

double max_nodal_error(const PLConvexFunction& f, const Field& exact) {
  double e = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    e = std::max(e, std::abs(f.heights()[i] - exact(f.sites()[i])));
  return e;
}

}  // namespace

TEST_CASE("target masses") {
  const DirichletProblem p = make_dirichlet_problem(Domain2D::square(1.0), 0.1, RhsField::constant(1.0), kQuadratic);
  for (std::size_t i = 0; i < p.sites.size(); ++i) {
    if (p.boundary[i]) {
      CHECK(p.targets[i] == 0.0);
    } else {
      CHECK(p.targets[i] == doctest::Approx(0.01).epsilon(1e-14));
    }
  }
  CHECK(target_masses(p) == p.targets);

  const DirichletProblem d =
      make_dirichlet_problem(Domain2D::square(1.0), 0.1, RhsField::dual_translator(0.125), kQuadratic);
  for (std::size_t i = 0; i < d.sites.size(); ++i)
    if (norm(d.sites[i]) < 1e-9) CHECK(std::abs(d.targets[i] - 0.01) < 1e-4);

  const DirichletProblem g =
      make_dirichlet_problem(Domain2D::square(1.0), 0.1, RhsField::degenerate(0.125), kQuadratic);
  for (std::size_t i = 0; i < g.sites.size(); ++i)
    if (!g.boundary[i]) CHECK(g.targets[i] > 0.0);
}

TEST_CASE("boundary sites are the hull boundary") {
  const DirichletProblem p = make_dirichlet_problem(Domain2D::disk(1.0), 0.25, RhsField::constant(), kQuadratic);
  const auto flags = hull_boundary_flags(p.sites);
  CHECK(flags == p.boundary);
}

TEST_CASE("quadratic Dirichlet problem is solved exactly") {
  const DirichletProblem p = make_dirichlet_problem(Domain2D::square(1.0), 0.1, RhsField::constant(), kQuadratic);
  const SolveReport r = solve(p);
  CHECK(r.max_residual <= 1e-8);
  CHECK(residual(r.solution, p) <= 1e-8);
  CHECK(max_nodal_error(r.solution, kQuadratic) < 0.01);
  CHECK(max_nodal_error(r.solution, kQuadratic) <= 0.5 * 0.01 * 1.01);
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["iterations"].get<long>() == r.iterations);
  CHECK(j["h"].get<double>() == 0.1);
  CHECK(j.contains("max_residual"));
  CHECK(j.contains("alpha"));
}

TEST_CASE("residual of exact and affine functions") {
  const double h = 0.1;
  const DirichletProblem p = make_dirichlet_problem(Domain2D::square(1.0), h, RhsField::constant(), kQuadratic);
  std::vector<double> z;
  for (Vec2 x : p.sites) z.push_back(kQuadratic(x));
  const PLConvexFunction exact = lower_envelope(p.sites, z);
  const MAMeasure m = ma_measure(exact);
  for (std::size_t i = 0; i < p.sites.size(); ++i) {
    if (p.boundary[i] || Domain2D::square(1.0).boundary_distance(p.sites[i]) < 1.5 * h) continue;
    CHECK(std::abs(m.masses[i] - p.targets[i]) <= 1e-12 * p.targets[i]);
  }
  std::vector<double> flat;
  for (Vec2 x : p.sites) flat.push_back(0.3 * x.x - x.y);
  CHECK(residual(lower_envelope(p.sites, flat), p) == doctest::Approx(1.0));
}

TEST_CASE("non-positive tolerance and exhausted budgets raise NoConvergence") {
  const DirichletProblem p = make_dirichlet_problem(Domain2D::square(1.0), 0.2, RhsField::constant(), kQuadratic);
  for (double tol : {0.0, -1.0}) {
    SolveOptions o;
    o.tol = tol;
    CHECK_THROWS_AS(solve(p, o), NoConvergence);
  }
  SolveOptions o;
  o.max_iters = 1;
  try {
    solve(p, o);
    FAIL("expected NoConvergence");
  } catch (const NoConvergence& e) {
    CHECK(e.code() == ErrorCode::no_convergence);
    CHECK(std::isfinite(e.residual()));
    CHECK(e.residual() > 1e-8);
  }
}

TEST_CASE("infeasible and degenerate problems") {
  // concave boundary data: boundary sites lie above the envelope of the others
  // concave data along the straight sides of a square cannot be the trace of
  // a convex function
  const DirichletProblem p = make_dirichlet_problem(Domain2D::square(1.0), 0.25, RhsField::constant(),
                                                    [](Vec2 x) { return -norm2(x); });
  try {
    solve(p);
    FAIL("expected InfeasibleBoundary");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::infeasible_boundary);
  }
  try {
    make_dirichlet_problem(Domain2D::disk(0.05), 0.1, RhsField::constant(), kQuadratic);
    FAIL("expected EmptyDomain");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_domain);
  }
  try {
    make_dirichlet_problem(Domain2D::square(1.0), 0.25, RhsField::constant(),
                           [](Vec2 x) { return x.x > 0.9 ? std::nan("") : 0.0; });
    FAIL("expected NonfiniteValue");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::nonfinite_value);
  }
}

TEST_CASE("Newton and Oliker-Prussner agree") {
  const DirichletProblem p = make_dirichlet_problem(Domain2D::disk(1.0), 0.2, RhsField::dual_translator(0.125),
                                                    [](Vec2 x) { return radial_dual_value(0.125, norm(x)); });
  SolveOptions newton;
  SolveOptions op;
  op.scheme = SolverScheme::oliker_prussner;
  op.tol = 1e-7;
  const SolveReport a = solve(p, newton);
  const SolveReport b = solve(p, op);
  CHECK(b.max_residual <= 1e-7);
  // heights never rise above the boundary envelope
  const std::vector<double> env = boundary_envelope(p);
  for (std::size_t i = 0; i < p.sites.size(); ++i) {
    CHECK(b.solution.heights()[i] <= env[i]);
    CHECK(std::abs(a.solution.heights()[i] - b.solution.heights()[i]) <= 1e-5);
  }
}

TEST_CASE("comparison principle") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> bump(0.0, 0.1);
  const DirichletProblem p = make_dirichlet_problem(Domain2D::square(1.0), 0.125, RhsField::constant(), kQuadratic);
  const SolveReport base = solve(p);
  for (int trial = 0; trial < 3; ++trial) {
    DirichletProblem q = p;
    // raise the data by a convex-compatible amount: a random affine function
    // that is nonnegative on the domain plus a constant
    const double c0 = bump(rng), c1 = bump(rng), c2 = bump(rng);
    for (std::size_t i = 0; i < q.sites.size(); ++i)
      if (q.boundary[i]) q.boundary_values[i] += c0 + c1 * (1 + q.sites[i].x) + c2 * (1 - q.sites[i].y);
    const SolveReport up = solve(q);
    for (std::size_t i = 0; i < p.sites.size(); ++i)
      CHECK(up.solution.heights()[i] >= base.solution.heights()[i] - 1e-9);
  }
  // a non-affine raise of the boundary data
  DirichletProblem q = p;
  for (std::size_t i = 0; i < q.sites.size(); ++i)
    if (q.boundary[i]) q.boundary_values[i] += 0.05 * std::abs(q.sites[i].x + 0.3 * q.sites[i].y);
  const SolveReport up = solve(q);
  for (std::size_t i = 0; i < p.sites.size(); ++i)
    CHECK(up.solution.heights()[i] >= base.solution.heights()[i] - 1e-9);
}

TEST_CASE("unimodular shear of the problem shears the solution") {
  const DirichletProblem p = make_dirichlet_problem(
      Domain2D::disk(1.0), 0.125, RhsField::dual_translator(0.125),
      [](Vec2 x) { return radial_dual_value(0.125, norm(x)) + 0.2 * x.x; });
  DirichletProblem q = p;
  const Mat2 A{1.0, 1.0, 0.0, 1.0};
  for (Vec2& x : q.sites) x = A * x;
  const SolveReport a = solve(p), b = solve(q);
  for (std::size_t i = 0; i < p.sites.size(); ++i)
    CHECK(std::abs(a.solution.heights()[i] - b.solution.heights()[i]) <= 1e-7);
}

TEST_CASE("total mass is conserved") {
  const double tol = 1e-8;
  const DirichletProblem p = make_dirichlet_problem(Domain2D::disk(1.5), 0.1, RhsField::dual_translator(0.2),
                                                    [](Vec2 x) { return radial_dual_value(0.2, norm(x)); });
  const SolveReport r = solve(p, {tol, 1000000, SolverScheme::damped_newton});
  double total = 0.0, target = 0.0;
  std::size_t n = 0;
  const MAMeasure m = ma_measure(r.solution);
  for (std::size_t i = 0; i < p.sites.size(); ++i) {
    if (p.boundary[i]) continue;
    total += m.masses[i];
    target += p.targets[i];
    ++n;
  }
  // every site is within tol relative, so the sum is too
  CHECK(std::abs(total - target) <= tol * target);
  CHECK(std::abs(total - target) <= static_cast<double>(n) * tol);
}

TEST_CASE("radial dual solve improves under refinement") {
  const double alpha = 0.125;
  const Field exact = [=](Vec2 x) { return radial_dual_value(alpha, norm(x)); };
  double err[2];
  int k = 0;
  for (double h : {0.2, 0.1}) {
    const DirichletProblem p =
        make_dirichlet_problem(Domain2D::square(1.5), h, RhsField::dual_translator(alpha), exact);
    err[k++] = max_nodal_error(solve(p).solution, exact);
  }
  CHECK(err[1] <= 0.6 * err[0]);
}
