#pragma once

#include <span>
#include <vector>

#include "tma/geometry.hpp"

namespace tma {

// Floating-point expansion: a sum of nonoverlapping doubles stored in order
// of increasing magnitude. Used to decide signs exactly when the fast
// floating-point filter is inconclusive.
class Expansion {
 public:
  Expansion() = default;
  explicit Expansion(double a) {
    if (a != 0.0) c_.push_back(a);
  }

  static Expansion product(double a, double b);
  static Expansion difference(double a, double b);

  Expansion operator+(const Expansion& o) const;
  Expansion operator-(const Expansion& o) const;
  Expansion operator-() const;
  Expansion operator*(double b) const;
  Expansion operator*(const Expansion& o) const;

  int sign() const {
    if (c_.empty()) return 0;
    return c_.back() > 0.0 ? 1 : -1;
  }
  double estimate() const;
  std::span<const double> components() const { return c_; }

 private:
  std::vector<double> c_;
};

// +1 if (a, b, c) turn counterclockwise, -1 if clockwise, 0 if collinear.
int orient2d(Vec2 a, Vec2 b, Vec2 c);

// Lifted-point test. With (a, b, c) counterclockwise in the plane, returns +1
// iff the lifted point (p, hp) lies strictly below the plane through the
// lifted a, b, c; 0 if on it.
int orient_lifted(Vec2 a, double ha, Vec2 b, double hb, Vec2 c, double hc,
                  Vec2 p, double hp);

// Sign of (y.x * x.x + y.y * x.y - u) - (y.x * z.x + y.y * z.y - w), exact.
int compare_affine(Vec2 y, Vec2 x, double u, Vec2 z, double w);

// Exact value y.x * x.x + y.y * x.y - u as an expansion.
Expansion affine_expansion(Vec2 y, Vec2 x, double u);

}  // namespace tma
