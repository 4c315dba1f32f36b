#pragma once

#include <vector>

#include "tma/geometry.hpp"

namespace tma {

enum class ProfileKind { primal_translator, dual_translator };

// Rotationally symmetric solution u(x) = v(|x|) with v(0) = v'(0) = 0.
//   primal: u''u'/r = (1 + u'^2)^(2 - 1/(2 alpha))
//   dual:   v''v'/r = (eta + r^2)^(1/(2 alpha) - 2)
// Slopes come from exact first integrals; values from a cached table of
// Gauss-Kronrod integrals of the slope on a geometric grid.
class RadialProfile {
 public:
  RadialProfile(ProfileKind kind, double alpha, double eta = 1.0, double table_radius = 4096.0);

  ProfileKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double eta() const { return eta_; }

  double slope(double r) const;
  double value(double r) const;
  // Right-hand side of the radial equation at r (for the primal, in terms of
  // the slope at r).
  double rhs(double r) const;
  double operator()(Vec2 x) const { return value(norm(x)); }

 private:
  double integrate(double a, double b) const;

  ProfileKind kind_;
  double alpha_;
  double eta_;
  std::vector<double> r_;    // table radii, r_[0] = 0
  std::vector<double> cum_;  // value at r_
};

double radial_primal_slope(double alpha, double r);
double radial_primal_value(double alpha, double r);
double radial_dual_slope(double alpha, double r, double eta = 1.0);
double radial_dual_value(double alpha, double r, double eta = 1.0);

// a |x1|^p + b x2^2 with p = 1/alpha - 2 and 2 a b p (p - 1) = 1, which solves
// det D^2 u = |x1|^(1/alpha - 4).
struct SeparableSolution {
  double alpha;
  double a;
  double b;
  double p;

  static SeparableSolution make(double alpha, double a = 1.0);
  double operator()(Vec2 x) const;
  // Semi-axes of the section {u <= t} about the origin.
  Vec2 section_semi_axes(double t) const;
};

double separable_value(double alpha, double a, Vec2 x);

}  // namespace tma
