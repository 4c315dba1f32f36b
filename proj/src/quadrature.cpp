#include "tma/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "tma/error.hpp"

namespace tma {
namespace {

void add_orbit3(TriangleRule& r, double a, double b, double w) {
  // Permutations of (a, b, b).
  r.points.push_back({a, b, b});
  r.points.push_back({b, a, b});
  r.points.push_back({b, b, a});
  for (int k = 0; k < 3; ++k) r.weights.push_back(w);
}

TriangleRule make_rule(int degree) {
  TriangleRule r{degree, {}, {}};
  switch (degree) {
    case 1:
      r.points.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
      r.weights.push_back(1.0);
      break;
    case 2:
      add_orbit3(r, 2.0 / 3, 1.0 / 6, 1.0 / 3);
      break;
    case 4:
      add_orbit3(r, 0.108103018168070, 0.445948490915965, 0.223381589678011);
      add_orbit3(r, 0.816847572980459, 0.091576213509771, 0.109951743655322);
      break;
    case 5:
      r.points.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
      r.weights.push_back(0.225);
      add_orbit3(r, 0.059715871789770, 0.470142064105115, 0.132394152788506);
      add_orbit3(r, 0.797426985353087, 0.101286507323456, 0.125939180544827);
      break;
    default:
      fail(ErrorCode::invalid_argument, "unsupported triangle rule");
  }
  return r;
}

}  // namespace

const TriangleRule& triangle_rule(int order) {
  static const TriangleRule r1 = make_rule(1), r2 = make_rule(2), r4 = make_rule(4),
                            r5 = make_rule(5);
  if (order <= 0) fail(ErrorCode::invalid_argument, "quadrature order must be >= 1");
  if (order == 1) return r1;
  if (order == 2) return r2;
  if (order <= 4) return r4;
  return r5;
}

double integrate_triangle(const PlaneFunction& f, Vec2 a, Vec2 b, Vec2 c, int order) {
  const TriangleRule& r = triangle_rule(order);
  const double area = 0.5 * cross(b - a, c - a);
  double s = 0.0;
  for (std::size_t k = 0; k < r.points.size(); ++k) {
    const auto& l = r.points[k];
    s += r.weights[k] * f(l[0] * a + l[1] * b + l[2] * c);
  }
  return area * s;
}

double integrate_polygon(const PlaneFunction& f, std::span<const Vec2> poly, int order) {
  double s = 0.0;
  for (std::size_t k = 1; k + 1 < poly.size(); ++k)
    s += integrate_triangle(f, poly[0], poly[k], poly[k + 1], order);
  return s;
}

const DiskRule& disk_rule() {
  static const DiskRule rule = [] {
    // Gauss-Legendre nodes on [-1, 1].
    constexpr int nr = 5;
    constexpr int nt = 16;
    const double x[nr] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                          0.9061798459386640};
    const double w[nr] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                          0.4786286704993665, 0.2369268850561891};
    DiskRule d;
    for (int i = 0; i < nr; ++i) {
      const double r = 0.5 * (x[i] + 1.0);
      const double wr = 0.5 * w[i] * r;  // includes the polar Jacobian
      for (int j = 0; j < nt; ++j) {
        const double th = 2.0 * std::numbers::pi * (j + 0.5) / nt;
        d.points.push_back({r * std::cos(th), r * std::sin(th)});
        d.weights.push_back(wr * 2.0 * std::numbers::pi / nt);
      }
    }
    return d;
  }();
  return rule;
}

double integrate_ellipse(const PlaneFunction& f, Vec2 center, const Mat2& L) {
  const DiskRule& d = disk_rule();
  double s = 0.0;
  for (std::size_t k = 0; k < d.points.size(); ++k) s += d.weights[k] * f(center + L * d.points[k]);
  return std::abs(L.det()) * s;
}

}  // namespace tma
