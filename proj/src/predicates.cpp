#include "tma/predicates.hpp"

#include <cmath>
#include <limits>

namespace tma {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon() / 2;

inline void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  const double bv = s - a;
  const double av = s - bv;
  e = (a - av) + (b - bv);
}

inline void fast_two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  e = b - (s - a);
}

inline void two_product(double a, double b, double& p, double& e) {
  p = a * b;
  e = std::fma(a, b, -p);
}

// Adds one double to an expansion, dropping zero components.
std::vector<double> grow(const std::vector<double>& e, double b) {
  std::vector<double> h;
  h.reserve(e.size() + 1);
  double q = b;
  for (double ei : e) {
    double s, err;
    two_sum(q, ei, s, err);
    if (err != 0.0) h.push_back(err);
    q = s;
  }
  if (q != 0.0) h.push_back(q);
  return h;
}

}  // namespace

Expansion Expansion::product(double a, double b) {
  double p, e;
  two_product(a, b, p, e);
  Expansion out;
  if (e != 0.0) out.c_.push_back(e);
  if (p != 0.0) out.c_.push_back(p);
  return out;
}

Expansion Expansion::difference(double a, double b) {
  double s, e;
  two_sum(a, -b, s, e);
  Expansion out;
  if (e != 0.0) out.c_.push_back(e);
  if (s != 0.0) out.c_.push_back(s);
  return out;
}

Expansion Expansion::operator+(const Expansion& o) const {
  Expansion out;
  const bool self_longer = c_.size() >= o.c_.size();
  out.c_ = self_longer ? c_ : o.c_;
  for (double v : (self_longer ? o.c_ : c_)) out.c_ = grow(out.c_, v);
  return out;
}

Expansion Expansion::operator-() const {
  Expansion out = *this;
  for (double& v : out.c_) v = -v;
  return out;
}

Expansion Expansion::operator-(const Expansion& o) const { return *this + (-o); }

Expansion Expansion::operator*(double b) const {
  Expansion out;
  if (c_.empty() || b == 0.0) return out;
  std::vector<double>& h = out.c_;
  h.reserve(2 * c_.size());
  double q, hh;
  two_product(c_[0], b, q, hh);
  if (hh != 0.0) h.push_back(hh);
  for (std::size_t i = 1; i < c_.size(); ++i) {
    double p1, p0, sum;
    two_product(c_[i], b, p1, p0);
    two_sum(q, p0, sum, hh);
    if (hh != 0.0) h.push_back(hh);
    fast_two_sum(p1, sum, q, hh);
    if (hh != 0.0) h.push_back(hh);
  }
  if (q != 0.0) h.push_back(q);
  return out;
}

Expansion Expansion::operator*(const Expansion& o) const {
  Expansion out;
  for (double v : o.c_) out = out + (*this * v);
  return out;
}

double Expansion::estimate() const {
  double s = 0.0;
  for (double v : c_) s += v;
  return s;
}

int orient2d(Vec2 a, Vec2 b, Vec2 c) {
  const double detleft = (a.x - c.x) * (b.y - c.y);
  const double detright = (a.y - c.y) * (b.x - c.x);
  const double det = detleft - detright;
  const double bound = (3.0 + 16.0 * kEps) * kEps * (std::abs(detleft) + std::abs(detright));
  if (det > bound) return 1;
  if (-det > bound) return -1;
  if (detleft == 0.0 && detright == 0.0) return 0;

  const Expansion acx = Expansion::difference(a.x, c.x);
  const Expansion acy = Expansion::difference(a.y, c.y);
  const Expansion bcx = Expansion::difference(b.x, c.x);
  const Expansion bcy = Expansion::difference(b.y, c.y);
  return (acx * bcy - acy * bcx).sign();
}

int orient_lifted(Vec2 a, double ha, Vec2 b, double hb, Vec2 c, double hc,
                  Vec2 p, double hp) {
  const double adx = a.x - p.x, bdx = b.x - p.x, cdx = c.x - p.x;
  const double ady = a.y - p.y, bdy = b.y - p.y, cdy = c.y - p.y;
  const double adz = ha - hp, bdz = hb - hp, cdz = hc - hp;

  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double det = adz * (bdxcdy - cdxbdy) + bdz * (cdxady - adxcdy) +
                     cdz * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * std::abs(adz) +
                           (std::abs(cdxady) + std::abs(adxcdy)) * std::abs(bdz) +
                           (std::abs(adxbdy) + std::abs(bdxady)) * std::abs(cdz);
  const double bound = (7.0 + 56.0 * kEps) * kEps * permanent;
  if (det > bound) return 1;
  if (-det > bound) return -1;

  const Expansion ex = Expansion::difference(a.x, p.x);
  const Expansion fx = Expansion::difference(b.x, p.x);
  const Expansion gx = Expansion::difference(c.x, p.x);
  const Expansion ey = Expansion::difference(a.y, p.y);
  const Expansion fy = Expansion::difference(b.y, p.y);
  const Expansion gy = Expansion::difference(c.y, p.y);
  const Expansion ez = Expansion::difference(ha, hp);
  const Expansion fz = Expansion::difference(hb, hp);
  const Expansion gz = Expansion::difference(hc, hp);
  const Expansion exact = ez * (fx * gy - gx * fy) + fz * (gx * ey - ex * gy) +
                          gz * (ex * fy - fx * ey);
  return exact.sign();
}

Expansion affine_expansion(Vec2 y, Vec2 x, double u) {
  return Expansion::product(y.x, x.x) + Expansion::product(y.y, x.y) + Expansion(-u);
}

int compare_affine(Vec2 y, Vec2 x, double u, Vec2 z, double w) {
  const double p1 = y.x * x.x, p2 = y.y * x.y;
  const double q1 = y.x * z.x, q2 = y.y * z.y;
  const double a = (p1 + p2) - u;
  const double b = (q1 + q2) - w;
  // Each value carries at most three roundings of magnitude-sum size.
  const double bound = 4.0 * kEps *
      (std::abs(p1) + std::abs(p2) + std::abs(u) + std::abs(q1) + std::abs(q2) + std::abs(w));
  const double diff = a - b;
  if (diff > bound) return 1;
  if (-diff > bound) return -1;
  return (affine_expansion(y, x, u) - affine_expansion(y, z, w)).sign();
}

}  // namespace tma
