#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "tma/geometry.hpp"

namespace tma {

// Symmetric triangle rule in barycentric coordinates; weights sum to 1.
struct TriangleRule {
  int degree;
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
};

// Rule exact for polynomials of the given total degree (1..5; 3 uses the
// degree-4 rule).
const TriangleRule& triangle_rule(int order);

using PlaneFunction = std::function<double(Vec2)>;

double integrate_triangle(const PlaneFunction& f, Vec2 a, Vec2 b, Vec2 c, int order = 4);

// Fan from the first vertex; the polygon must be convex.
double integrate_polygon(const PlaneFunction& f, std::span<const Vec2> poly, int order = 4);

// Product rule on the unit disk: Gauss-Legendre in r (weight r) times the
// trapezoid rule in angle. Weights sum to pi.
struct DiskRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
};
const DiskRule& disk_rule();

// Integral over the ellipse {center + L u : |u| <= 1}.
double integrate_ellipse(const PlaneFunction& f, Vec2 center, const Mat2& L);

}  // namespace tma
