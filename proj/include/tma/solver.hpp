#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tma/grid.hpp"
#include "tma/ma_measure.hpp"

namespace tma {

// Dirichlet problem for det D^2 v = f on the lattice nodes of a domain.
// Sites on the boundary of their convex hull carry the boundary data; every
// other site is an unknown whose Monge-Ampere mass must equal the integral
// of f over its lattice cell.
struct DirichletProblem {
  Domain2D domain;
  double h = 0.0;
  RhsField rhs;
  std::vector<Vec2> sites;
  std::vector<bool> boundary;
  std::vector<double> boundary_values;  // meaningful on boundary sites
  std::vector<double> targets;          // zero on boundary sites
};

DirichletProblem make_dirichlet_problem(const Domain2D& domain, double h, const RhsField& rhs,
                                        const Field& boundary_data);

// Composite 2x2 midpoint rule over the h x h cell centred at each interior site.
std::vector<double> target_masses(const DirichletProblem& problem);

enum class SolverScheme {
  damped_newton,     // Newton on the exact masses with the dual-edge Laplacian
  oliker_prussner,   // monotone per-site lowering by bisection
};

struct SolveOptions {
  double tol = 1e-8;
  long max_iters = 1000000;
  SolverScheme scheme = SolverScheme::damped_newton;
};

struct SolveReport {
  long iterations = 0;
  double max_residual = 0.0;
  PLConvexFunction solution;
  double h = 0.0;
  double alpha = 0.0;

  std::string to_json() const;
};

SolveReport solve(const DirichletProblem& problem, const SolveOptions& options = {});

// Max over interior sites of |mass - target| / target.
double residual(const PLConvexFunction& f, const DirichletProblem& problem);

// Convex envelope of the boundary data evaluated at every site.
std::vector<double> boundary_envelope(const DirichletProblem& problem);

}  // namespace tma
