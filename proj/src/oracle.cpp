#include "tma/oracle.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "tma/error.hpp"

namespace tma {

double radial_primal_slope(double alpha, double r) {
  require_alpha(alpha);
  if (!(r >= 0.0)) fail(ErrorCode::invalid_argument, "radius must be nonnegative");
  // (1 + p^2)^(1/(2a) - 1) = 1 + c r^2, c = 1/(2a) - 1
  const double c = 1.0 / (2.0 * alpha) - 1.0;
  const double e = 2.0 * alpha / (1.0 - 2.0 * alpha);
  return std::sqrt(std::expm1(e * std::log1p(c * r * r)));
}

double radial_dual_slope(double alpha, double r, double eta) {
  require_alpha(alpha);
  if (!(r >= 0.0)) fail(ErrorCode::invalid_argument, "radius must be nonnegative");
  if (!(eta >= 0.0)) fail(ErrorCode::invalid_argument, "eta must be nonnegative");
  // q^2 = ((eta + r^2)^k - eta^k) / k, k = 1/(2a) - 1
  const double k = 1.0 / (2.0 * alpha) - 1.0;
  if (eta == 0.0) return std::sqrt(std::pow(r * r, k) / k);
  return std::sqrt(std::pow(eta, k) * std::expm1(k * std::log1p(r * r / eta)) / k);
}

RadialProfile::RadialProfile(ProfileKind kind, double alpha, double eta, double table_radius)
    : kind_(kind), alpha_(alpha), eta_(eta) {
  require_alpha(alpha);
  if (!(eta >= 0.0 && eta <= 1.0)) fail(ErrorCode::invalid_argument, "eta must lie in [0, 1]");
  r_.push_back(0.0);
  cum_.push_back(0.0);
  double r = 1.0 / 64;
  while (true) {
    cum_.push_back(cum_.back() + integrate(r_.back(), r));
    r_.push_back(r);
    if (r >= table_radius) break;
    r *= 1.25;
  }
}

double RadialProfile::slope(double r) const {
  return kind_ == ProfileKind::primal_translator ? radial_primal_slope(alpha_, r)
                                                 : radial_dual_slope(alpha_, r, eta_);
}

double RadialProfile::rhs(double r) const {
  if (kind_ == ProfileKind::primal_translator) {
    const double p = slope(r);
    return std::pow(1.0 + p * p, 2.0 - 1.0 / (2.0 * alpha_));
  }
  return std::pow(eta_ + r * r, 1.0 / (2.0 * alpha_) - 2.0);
}

double RadialProfile::integrate(double a, double b) const {
  if (b <= a) return 0.0;
  auto f = [this](double s) { return slope(s); };
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 4, 1e-13, &err);
  return v;
}

double RadialProfile::value(double r) const {
  if (!(r >= 0.0) || !std::isfinite(r)) fail(ErrorCode::invalid_argument, "radius must be finite and nonnegative");
  auto it = std::upper_bound(r_.begin(), r_.end(), r);
  const std::size_t k = static_cast<std::size_t>(it - r_.begin()) - 1;
  return cum_[k] + integrate(r_[k], r);
}

namespace {

const RadialProfile& cached_profile(ProfileKind kind, double alpha, double eta) {
  static std::mutex mu;
  static std::map<std::tuple<int, double, double>, std::unique_ptr<RadialProfile>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(static_cast<int>(kind), alpha, eta);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_unique<RadialProfile>(kind, alpha, eta)).first;
  return *it->second;
}

}  // namespace

double radial_primal_value(double alpha, double r) {
  require_alpha(alpha);
  return cached_profile(ProfileKind::primal_translator, alpha, 1.0).value(r);
}

double radial_dual_value(double alpha, double r, double eta) {
  require_alpha(alpha);
  if (!(eta >= 0.0 && eta <= 1.0)) fail(ErrorCode::invalid_argument, "eta must lie in [0, 1]");
  return cached_profile(ProfileKind::dual_translator, alpha, eta).value(r);
}

SeparableSolution SeparableSolution::make(double alpha, double a) {
  require_alpha(alpha);
  if (!(a > 0.0)) fail(ErrorCode::invalid_argument, "coefficient a must be positive");
  const double p = 1.0 / alpha - 2.0;
  return {alpha, a, 1.0 / (2.0 * a * p * (p - 1.0)), p};
}

double SeparableSolution::operator()(Vec2 x) const {
  return a * std::pow(std::abs(x.x), p) + b * x.y * x.y;
}

Vec2 SeparableSolution::section_semi_axes(double t) const {
  return {std::pow(t / a, 1.0 / p), std::sqrt(t / b)};
}

double separable_value(double alpha, double a, Vec2 x) {
  return SeparableSolution::make(alpha, a)(x);
}

}  // namespace tma
