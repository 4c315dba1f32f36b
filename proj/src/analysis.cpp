#include "tma/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tma/error.hpp"

namespace tma {

std::pair<double, double> least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) fail(ErrorCode::invalid_argument, "least squares needs two or more points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) fail(ErrorCode::degenerate_input, "least squares abscissae coincide");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

GrowthFit growth_exponent(const Field& v, double r_min, double r_max, int n_circles,
                          const GrowthOptions& options) {
  if (n_circles < 4) fail(ErrorCode::invalid_argument, "need at least 4 circles");
  if (!(r_min > 0.0) || !(r_max > r_min)) fail(ErrorCode::invalid_argument, "need 0 < r_min < r_max");
  if (options.n_angles < 3) fail(ErrorCode::invalid_argument, "need at least 3 angles");
  GrowthFit fit;
  fit.slope_theory = options.slope_theory;
  const double ratio = std::pow(r_max / r_min, 1.0 / (n_circles - 1));
  const double v0 = v(options.base);
  for (int k = 0; k < n_circles; ++k) {
    const double R = k == n_circles - 1 ? r_max : r_min * std::pow(ratio, k);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int j = 0; j < options.n_angles; ++j) {
      const double th = 2.0 * std::numbers::pi * j / options.n_angles;
      const Vec2 e{std::cos(th), std::sin(th)};
      const Vec2 x = options.base + R * e;
      if (options.domain && !options.domain->contains(x))
        fail(ErrorCode::domain_too_small, "circle of radius " + format_double(R) + " leaves the domain");
      const double w = v(x) - v0 - R * dot(options.support, e);
      if (!std::isfinite(w)) fail(ErrorCode::nonfinite_value, "function value is not finite");
      lo = std::min(lo, w);
      hi = std::max(hi, w);
    }
    if (!(lo > 0.0)) fail(ErrorCode::invalid_argument, "function is not above its support plane on a circle");
    fit.radii.push_back(R);
    fit.vmin.push_back(lo);
    fit.vmax.push_back(hi);
  }
  std::vector<double> lx, ly;
  for (int k = 1; k < n_circles; ++k) {
    lx.push_back(std::log(fit.radii[k]));
    ly.push_back(0.5 * (std::log(fit.vmin[k]) + std::log(fit.vmax[k])));
  }
  std::tie(fit.slope, fit.intercept) = least_squares(lx, ly);
  const double s = std::isnan(fit.slope_theory) ? fit.slope : fit.slope_theory;
  double top = 0.0, bottom = std::numeric_limits<double>::infinity();
  for (int k = std::max(0, n_circles - 3); k < n_circles; ++k) {
    const double scale = std::pow(fit.radii[k], -s);
    top = std::max(top, fit.vmax[k] * scale);
    bottom = std::min(bottom, fit.vmin[k] * scale);
  }
  fit.ratio_proxy = top / bottom;
  return fit;
}

Mat2 dt_matrix(double t, double alpha) {
  require_alpha(alpha);
  if (!(t > 0.0)) fail(ErrorCode::invalid_argument, "t must be positive");
  return Mat2::diag(std::pow(t, alpha / (1.0 - 2.0 * alpha)), std::sqrt(t));
}

GammaRegion gamma_membership(Vec2 x, double alpha, double theta) {
  require_alpha(alpha);
  if (!(theta >= 0.0 && theta < 1.0)) fail(ErrorCode::invalid_argument, "theta must lie in [0, 1)");
  const double e = 1.0 / alpha - 2.0;
  auto g = [&](double s) {
    const Vec2 y = x / s;
    return std::pow(std::abs(y.x), e) + y.y * y.y;
  };
  if (g(1.0 - theta) < 1.0) return GammaRegion::inside;
  if (g(1.0 + theta) > 1.0) return GammaRegion::outside;
  return GammaRegion::band;
}

const char* gamma_region_name(GammaRegion r) {
  switch (r) {
    case GammaRegion::inside: return "inside";
    case GammaRegion::band: return "band";
    case GammaRegion::outside: return "outside";
  }
  return "?";
}

namespace {

template <class SectionAt>
CascadeSeries cascade(const std::vector<double>& levels, SectionAt section_at) {
  if (levels.size() < 2) fail(ErrorCode::invalid_argument, "a cascade needs two or more levels");
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (!(levels[k] > 0.0)) fail(ErrorCode::invalid_argument, "levels must be positive");
    if (k > 0 && !(levels[k] > levels[k - 1])) fail(ErrorCode::invalid_argument, "levels must increase");
  }
  CascadeSeries s;
  s.levels = levels;
  std::vector<double> lx, ly;
  for (double t : levels) {
    const Section sec = section_at(t);
    const EllipsoidFit fit = john_ellipsoid(sec.polygon);
    s.fits.push_back(fit);
    s.eccentricities.push_back(eccentricity(fit));
    s.areas.push_back(signed_area(sec.polygon));
    lx.push_back(std::log(t));
    ly.push_back(std::log(s.eccentricities.back()));
  }
  std::tie(s.slope, s.intercept) = least_squares(lx, ly);
  return s;
}

}  // namespace

CascadeSeries eccentricity_cascade(const GridFunction& v, Vec2 x0, Vec2 p,
                                   const std::vector<double>& levels) {
  return cascade(levels, [&](double t) { return extract_section(v, x0, p, t); });
}

CascadeSeries eccentricity_cascade(const PLConvexFunction& v, Vec2 x0, Vec2 p,
                                   const std::vector<double>& levels) {
  return cascade(levels, [&](double t) { return extract_section(v, x0, p, t); });
}

CascadeSeries eccentricity_cascade(const Field& v, Vec2 x0, Vec2 p, const std::vector<double>& levels,
                                   const LevelGrid& grid) {
  return cascade(levels, [&](double t) {
    const auto [domain, h] = grid(t);
    return extract_section(sample(v, domain, h), x0, p, t);
  });
}

CascadeSeries eccentricity_cascade(const SeparableSolution& s, const std::vector<double>& levels,
                                   int points_per_axis) {
  if (points_per_axis < 4) fail(ErrorCode::invalid_argument, "need at least 4 points per axis");
  const Field v = [s](Vec2 x) { return s(x); };
  return eccentricity_cascade(v, {0.0, 0.0}, {0.0, 0.0}, levels, [&](double t) {
    const Vec2 ax = s.section_semi_axes(t);
    const double wx = 1.5 * ax.x, wy = 1.5 * ax.y;
    const double h = std::min(ax.x, ax.y) / points_per_axis;
    return std::pair{Domain2D::polygon({{-wx, -wy}, {wx, -wy}, {wx, wy}, {-wx, wy}}), h};
  });
}

std::vector<double> dyadic_levels(double first, int count, double ratio) {
  if (!(first > 0.0) || count < 1 || !(ratio > 1.0)) fail(ErrorCode::invalid_argument, "bad level sequence");
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(first * std::pow(ratio, k));
  return out;
}

StabilityResult stability_check(const CascadeSeries& series, double M, double C1) {
  if (!(M > 0.0) || !(C1 > 0.0)) fail(ErrorCode::invalid_argument, "M and C1 must be positive");
  StabilityResult r;
  const auto& a = series.eccentricities;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] <= M) {
      r.l_prime = static_cast<int>(k);
      break;
    }
  }
  if (r.l_prime < 0) return r;
  double worst = 0.0;
  for (std::size_t k = r.l_prime; k < a.size(); ++k) worst = std::max(worst, a[k]);
  r.min_c1 = worst / M;
  r.holds = worst <= C1 * M;
  return r;
}

}  // namespace tma
