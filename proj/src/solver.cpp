#include "tma/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include "json.hpp"
#include <numeric>

#include "hull.hpp"
#include "tma/error.hpp"

namespace tma {

std::vector<double> target_masses(const DirichletProblem& problem) {
  const double h = problem.h;
  const double q = 0.25 * h;
  std::vector<double> t(problem.sites.size(), 0.0);
  for (std::size_t i = 0; i < problem.sites.size(); ++i) {
    if (problem.boundary[i]) continue;
    const Vec2 x = problem.sites[i];
    double s = 0.0;
    for (double dx : {-q, q})
      for (double dy : {-q, q}) s += problem.rhs({x.x + dx, x.y + dy});
    t[i] = 0.25 * h * h * s;
    if (!(t[i] > 0.0) || !std::isfinite(t[i]))
      fail(ErrorCode::invalid_argument, "target mass is not positive at an interior site");
  }
  return t;
}

DirichletProblem make_dirichlet_problem(const Domain2D& domain, double h, const RhsField& rhs,
                                        const Field& boundary_data) {
  DirichletProblem p{domain, h, rhs, lattice_nodes(domain, h), {}, {}, {}};
  if (p.sites.size() < 3) fail(ErrorCode::empty_domain, "too few lattice nodes in the domain");
  p.boundary = hull_boundary_flags(p.sites);
  p.boundary_values.assign(p.sites.size(), 0.0);
  for (std::size_t i = 0; i < p.sites.size(); ++i) {
    if (!p.boundary[i]) continue;
    p.boundary_values[i] = boundary_data(p.sites[i]);
    if (!std::isfinite(p.boundary_values[i]))
      fail(ErrorCode::nonfinite_value, "boundary value is not finite");
  }
  p.targets = target_masses(p);
  return p;
}

std::vector<double> boundary_envelope(const DirichletProblem& problem) {
  std::vector<Vec2> bs;
  std::vector<double> bv;
  for (std::size_t i = 0; i < problem.sites.size(); ++i) {
    if (!problem.boundary[i]) continue;
    bs.push_back(problem.sites[i]);
    bv.push_back(problem.boundary_values[i]);
  }
  const PLConvexFunction env(bs, bv);
  for (std::size_t k = 0; k < bs.size(); ++k)
    if (!env.active(k))
      fail(ErrorCode::infeasible_boundary,
           "boundary data is not convex: a boundary site lies above the envelope");
  std::vector<double> out(problem.sites.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < problem.sites.size(); ++i) {
    if (problem.boundary[i]) {
      out[i] = bv[k++];
    } else {
      const auto v = env.evaluate(problem.sites[i]);
      if (!v) fail(ErrorCode::internal, "interior site outside the boundary hull");
      out[i] = *v;
    }
  }
  return out;
}

double residual(const PLConvexFunction& f, const DirichletProblem& problem) {
  const MAMeasure m = ma_measure(f);
  double worst = 0.0;
  for (std::size_t i = 0; i < problem.sites.size(); ++i) {
    if (problem.boundary[i]) continue;
    worst = std::max(worst, std::abs(m.masses[i] - problem.targets[i]) / problem.targets[i]);
  }
  return worst;
}

std::string SolveReport::to_json() const {
  nlohmann::ordered_json j;
  j["iterations"] = iterations;
  j["max_residual"] = max_residual;
  j["h"] = h;
  j["alpha"] = alpha;
  return j.dump(2);
}

namespace {

void check_problem(const DirichletProblem& p, const SolveOptions& opt) {
  if (!(opt.tol > 0.0))
    throw NoConvergence("tolerance must be positive", std::numeric_limits<double>::infinity());
  const std::size_t n = p.sites.size();
  if (p.boundary.size() != n || p.boundary_values.size() != n || p.targets.size() != n)
    fail(ErrorCode::invalid_argument, "problem arrays have inconsistent sizes");
}

// Initial guess below the boundary envelope: E - s * phi with phi the
// geometric mean of the distances to the hull edges (concave, zero on the
// hull) and s large enough that every cell carries at least its target mass.
std::vector<double> newton_start(const DirichletProblem& p, const std::vector<double>& env) {
  const Polygon hull = convex_hull(p.sites);
  const std::size_t n = p.sites.size();
  std::vector<double> phi(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (p.boundary[i]) continue;
    double acc = 0.0;
    for (std::size_t k = 0; k < hull.size(); ++k) {
      const Vec2 a = hull[k], b = hull[(k + 1) % hull.size()];
      const double d = cross(b - a, p.sites[i] - a) / norm(b - a);
      acc += std::log(std::max(d, 1e-300));
    }
    phi[i] = std::exp(acc / static_cast<double>(hull.size()));
  }
  std::vector<double> neg(n);
  for (std::size_t i = 0; i < n; ++i) neg[i] = -phi[i];
  const MAMeasure m1 = ma_measure(PLConvexFunction(p.sites, neg));
  double ratio = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (!p.boundary[i] && m1.masses[i] > 0.0) ratio = std::max(ratio, p.targets[i] / m1.masses[i]);
  const double s = ratio > 0.0 ? std::sqrt(ratio) : 1.0;
  std::vector<double> h0(n);
  for (std::size_t i = 0; i < n; ++i) h0[i] = env[i] - s * phi[i];
  return h0;
}

struct MassState {
  std::vector<double> masses;
  bool all_active = true;
  double min_mass = 0.0;
  double norm2 = 0.0;
  double max_rel = 0.0;
};

MassState evaluate(const DirichletProblem& p, const PLConvexFunction& f) {
  MassState s;
  const MAMeasure m = ma_measure(f);
  s.masses = m.masses;
  s.min_mass = std::numeric_limits<double>::infinity();
  double sq = 0.0;
  for (std::size_t i = 0; i < p.sites.size(); ++i) {
    if (p.boundary[i]) continue;
    if (!f.active(i)) s.all_active = false;
    s.min_mass = std::min(s.min_mass, m.masses[i]);
    const double d = m.masses[i] - p.targets[i];
    sq += d * d;
    s.max_rel = std::max(s.max_rel, std::abs(d) / p.targets[i]);
  }
  s.norm2 = std::sqrt(sq);
  return s;
}

SolveReport solve_newton(const DirichletProblem& p, const SolveOptions& opt,
                         const std::vector<double>& env) {
  const std::size_t n = p.sites.size();
  std::vector<long> unknown(n, -1);
  long nu = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (!p.boundary[i]) unknown[i] = nu++;

  std::vector<double> h = newton_start(p, env);
  PLConvexFunction f(p.sites, h);
  MassState st = evaluate(p, f);
  if (!st.all_active) fail(ErrorCode::internal, "initial guess is not strictly convex");
  double min_target = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    if (!p.boundary[i]) min_target = std::min(min_target, p.targets[i]);
  const double eps = 0.5 * std::min(min_target, st.min_mass);

  long iter = 0;
  while (st.max_rel > opt.tol) {
    if (iter >= opt.max_iters)
      throw NoConvergence("damped Newton reached the iteration limit", st.max_rel);
    const MassJacobian jac = mass_jacobian(f);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4 * jac.edges.size());
    for (std::size_t e = 0; e < jac.edges.size(); ++e) {
      const long a = unknown[jac.edges[e][0]], b = unknown[jac.edges[e][1]];
      const double w = jac.weights[e];
      if (a >= 0) trip.emplace_back(a, a, w);
      if (b >= 0) trip.emplace_back(b, b, w);
      if (a >= 0 && b >= 0) {
        trip.emplace_back(a, b, -w);
        trip.emplace_back(b, a, -w);
      }
    }
    Eigen::SparseMatrix<double> L(nu, nu);
    L.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd rhs(nu);
    for (std::size_t i = 0; i < n; ++i)
      if (unknown[i] >= 0) rhs[unknown[i]] = st.masses[i] - p.targets[i];
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(L);
    if (ldlt.info() != Eigen::Success)
      throw NoConvergence("mass Jacobian factorisation failed", st.max_rel);
    const Eigen::VectorXd delta = ldlt.solve(rhs);

    double theta = 1.0;
    while (true) {
      std::vector<double> trial = h;
      for (std::size_t i = 0; i < n; ++i)
        if (unknown[i] >= 0) trial[i] += theta * delta[unknown[i]];
      PLConvexFunction ft(p.sites, trial);
      MassState sn = evaluate(p, ft);
      if (sn.all_active && sn.min_mass >= eps && sn.norm2 <= (1.0 - 0.5 * theta) * st.norm2) {
        h = std::move(trial);
        f = std::move(ft);
        st = std::move(sn);
        break;
      }
      theta *= 0.5;
      if (theta < 1e-10) {
        // The residual cannot be reduced further at this precision.
        throw NoConvergence("damped Newton line search stalled", st.max_rel);
      }
    }
    ++iter;
  }
  return SolveReport{iter, st.max_rel, std::move(f), p.h, p.rhs.alpha()};
}

SolveReport solve_oliker_prussner(const DirichletProblem& p, const SolveOptions& opt,
                                  const std::vector<double>& env) {
  const std::size_t n = p.sites.size();
  detail::RegularTriangulation rt(p.sites, env);
  auto mass_at = [&](int i, double height) {
    const Polygon cell = rt.trial_cell(i, height);
    return std::max(0.0, signed_area(cell));
  };
  std::vector<int> interior;
  for (std::size_t i = 0; i < n; ++i)
    if (!p.boundary[i]) interior.push_back(static_cast<int>(i));

  long updates = 0;
  const double step0 = p.h * p.h;
  while (true) {
    std::vector<double> deficit(n, 0.0);
    double worst = 0.0;
    for (int i : interior) {
      const double m = mass_at(i, rt.height(i));
      if (m > p.targets[i] * (1.0 + opt.tol))
        fail(ErrorCode::infeasible_boundary, "mass overshoot: a site cannot be lowered below its target");
      deficit[i] = (p.targets[i] - m) / p.targets[i];
      worst = std::max(worst, std::abs(deficit[i]));
    }
    if (worst <= opt.tol) break;
    std::vector<int> order = interior;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return deficit[a] > deficit[b]; });
    for (int i : order) {
      const double target = p.targets[i];
      double hi = rt.height(i);
      double m_hi = mass_at(i, hi);
      if ((target - m_hi) / target <= opt.tol) continue;
      if (updates >= opt.max_iters)
        throw NoConvergence("site-update budget exhausted", worst);
      double step = step0;
      double lo = hi - step;
      while (mass_at(i, lo) < target) {
        hi = lo;
        step *= 2.0;
        lo = hi - step;
        if (!std::isfinite(lo)) fail(ErrorCode::internal, "lowering diverged");
      }
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double mm = mass_at(i, mid);
        if (mm > target) {
          lo = mid;
        } else {
          hi = mid;
          if ((target - mm) / target <= 0.25 * opt.tol) break;
        }
      }
      rt.lower(i, hi);
      ++updates;
    }
  }
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = rt.height(static_cast<int>(i));
  PLConvexFunction f(p.sites, h);
  const double res = residual(f, p);
  return SolveReport{updates, res, std::move(f), p.h, p.rhs.alpha()};
}

}  // namespace

SolveReport solve(const DirichletProblem& problem, const SolveOptions& options) {
  check_problem(problem, options);
  const std::vector<double> env = boundary_envelope(problem);
  if (options.scheme == SolverScheme::oliker_prussner) return solve_oliker_prussner(problem, options, env);
  return solve_newton(problem, options, env);
}

}  // namespace tma
