#include "tma/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tma/predicates.hpp"

namespace tma {

Mat2 Mat2::inverse() const {
  const double d = det();
  return {a22 / d, -a12 / d, -a21 / d, a11 / d};
}

std::array<double, 2> singular_values(const Mat2& m) {
  // Closed form via the invariants of m^T m.
  const double s = m.a11 * m.a11 + m.a12 * m.a12 + m.a21 * m.a21 + m.a22 * m.a22;
  const double d = std::abs(m.det());
  const double disc = std::sqrt(std::max(0.0, s * s - 4.0 * d * d));
  const double big = std::sqrt(0.5 * (s + disc));
  const double small = big > 0.0 ? d / big : 0.0;
  return {big, small};
}

SymmetricEigen eigen_symmetric(const Mat2& m) {
  const double a = m.a11, b = 0.5 * (m.a12 + m.a21), c = m.a22;
  const double mean = 0.5 * (a + c);
  const double r = std::hypot(0.5 * (a - c), b);
  SymmetricEigen out;
  out.values = {mean - r, mean + r};
  // Rotation angle diagonalising [[a, b], [b, c]].
  const double theta = 0.5 * std::atan2(2.0 * b, a - c);
  // Column 0 belongs to the smaller eigenvalue.
  const double cs = std::cos(theta), sn = std::sin(theta);
  out.vectors = {sn, cs, -cs, sn};
  return out;
}

Mat2 sqrt_spd(const Mat2& m) {
  const SymmetricEigen e = eigen_symmetric(m);
  const double s0 = std::sqrt(std::max(0.0, e.values[0]));
  const double s1 = std::sqrt(std::max(0.0, e.values[1]));
  const Mat2& q = e.vectors;
  return q * Mat2::diag(s0, s1) * q.transpose();
}

double signed_area(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i], b = poly[(i + 1) % n];
    twice += a.x * b.y - a.y * b.x;
  }
  return 0.5 * twice;
}

Vec2 centroid(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n == 0) return {};
  if (n < 3) {
    Vec2 c;
    for (Vec2 p : poly) c += p;
    return c / static_cast<double>(n);
  }
  // Shift to the first vertex for accuracy far from the origin.
  const Vec2 o = poly[0];
  double a2 = 0.0;
  Vec2 acc;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = poly[i] - o, q = poly[(i + 1) % n] - o;
    const double w = cross(p, q);
    a2 += w;
    acc += w * (p + q);
  }
  if (a2 == 0.0) {
    Vec2 c;
    for (Vec2 p : poly) c += p;
    return c / static_cast<double>(n);
  }
  return o + acc / (3.0 * a2);
}

std::vector<std::size_t> convex_hull_indices(const std::vector<Vec2>& points) {
  const std::vector<Vec2> key = lattice_keys(points);
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return key[a].x < key[b].x || (key[a].x == key[b].x && key[a].y < key[b].y);
  });
  order.erase(std::unique(order.begin(), order.end(),
                          [&](std::size_t a, std::size_t b) { return key[a] == key[b]; }),
              order.end());
  if (order.size() < 3) return order;
  std::vector<std::size_t> hull(2 * order.size());
  std::size_t k = 0;
  for (std::size_t p : order) {
    while (k >= 2 && orient2d(key[hull[k - 2]], key[hull[k - 1]], key[p]) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = order.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && orient2d(key[hull[k - 2]], key[hull[k - 1]], key[order[i]]) <= 0) --k;
    hull[k++] = order[i];
  }
  hull.resize(k - 1);
  return hull;
}

Polygon convex_hull(std::vector<Vec2> pts) {
  Polygon hull;
  for (std::size_t i : convex_hull_indices(pts)) hull.push_back(pts[i]);
  return hull;
}

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = norm2(ab);
  double s = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return norm(p - (a + s * ab));
}

bool convex_contains(std::span<const Vec2> poly, Vec2 p, double slack) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i], b = poly[(i + 1) % n];
    const Vec2 e = b - a;
    const double len = norm(e);
    if (len == 0.0) continue;
    if (cross(e, p - a) / len < -slack) return false;
  }
  return true;
}

std::vector<Vec2> lattice_keys(const std::vector<Vec2>& points) {
  if (points.size() < 2) return points;
  const Vec2 o = points[0];
  double pitch = std::numeric_limits<double>::infinity();
  double extent = 0.0;
  for (Vec2 p : points) {
    const double dx = std::abs(p.x - o.x), dy = std::abs(p.y - o.y);
    extent = std::max({extent, dx, dy});
    if (dx > 0.0) pitch = std::min(pitch, dx);
    if (dy > 0.0) pitch = std::min(pitch, dy);
  }
  if (!std::isfinite(pitch) || extent / pitch > 1e9) return points;
  const double tol = 1e-9;
  std::vector<Vec2> keys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double kx = (points[i].x - o.x) / pitch, ky = (points[i].y - o.y) / pitch;
    const double rx = std::round(kx), ry = std::round(ky);
    if (std::abs(kx - rx) > tol || std::abs(ky - ry) > tol) return points;
    keys[i] = {rx, ry};
  }
  return keys;
}

}  // namespace tma
