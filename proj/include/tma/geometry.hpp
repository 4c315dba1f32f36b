#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace tma {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double norm2(Vec2 a) { return a.x * a.x + a.y * a.y; }

// Row-major 2x2 matrix.
struct Mat2 {
  double a11 = 1.0, a12 = 0.0, a21 = 0.0, a22 = 1.0;

  static Mat2 identity() { return {}; }
  static Mat2 diag(double d1, double d2) { return {d1, 0.0, 0.0, d2}; }
  static Mat2 rotation(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c, -s, s, c};
  }

  double det() const { return a11 * a22 - a12 * a21; }
  Mat2 transpose() const { return {a11, a21, a12, a22}; }
  Mat2 inverse() const;

  friend Vec2 operator*(const Mat2& m, Vec2 v) {
    return {m.a11 * v.x + m.a12 * v.y, m.a21 * v.x + m.a22 * v.y};
  }
  friend Mat2 operator*(const Mat2& m, const Mat2& n) {
    return {m.a11 * n.a11 + m.a12 * n.a21, m.a11 * n.a12 + m.a12 * n.a22,
            m.a21 * n.a11 + m.a22 * n.a21, m.a21 * n.a12 + m.a22 * n.a22};
  }
  friend Mat2 operator*(double s, const Mat2& m) {
    return {s * m.a11, s * m.a12, s * m.a21, s * m.a22};
  }
};

// Singular values, largest first.
std::array<double, 2> singular_values(const Mat2& m);

// Eigen-decomposition of a symmetric matrix: eigenvalues (ascending) and the
// rotation whose columns are the matching unit eigenvectors.
struct SymmetricEigen {
  std::array<double, 2> values;
  Mat2 vectors;
};
SymmetricEigen eigen_symmetric(const Mat2& m);

// Principal square root of a symmetric positive definite matrix.
Mat2 sqrt_spd(const Mat2& m);

using Polygon = std::vector<Vec2>;

// Signed shoelace area; positive for counterclockwise polygons.
double signed_area(std::span<const Vec2> poly);
Vec2 centroid(std::span<const Vec2> poly);

// Convex hull in counterclockwise order starting from the lexicographically
// smallest point; collinear boundary points are dropped. Uses exact
// orientation tests.
Polygon convex_hull(std::vector<Vec2> points);
std::vector<std::size_t> convex_hull_indices(const std::vector<Vec2>& points);

// Points that sit on a square lattice up to rounding (x = o + h k, k integer)
// are returned as their integer coordinates k, so that collinearity and
// lifted coplanarity are decided for the intended lattice rather than for
// the rounded doubles. Any other input is returned unchanged.
std::vector<Vec2> lattice_keys(const std::vector<Vec2>& points);

// Distance from p to segment [a, b].
double segment_distance(Vec2 p, Vec2 a, Vec2 b);

// True iff p lies in the closed convex counterclockwise polygon.
bool convex_contains(std::span<const Vec2> poly, Vec2 p, double slack = 0.0);

}  // namespace tma
