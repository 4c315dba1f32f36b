#include "tma/sections.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tma/error.hpp"
#include "tma/quadrature.hpp"

namespace tma {
namespace {

double node_value(const GridFunction& v, Vec2 x0) {
  const double fi = x0.x / v.h(), fj = x0.y / v.h();
  if (fi == std::round(fi) && fj == std::round(fj)) {
    const long k = v.index_of(static_cast<int>(fi), static_cast<int>(fj));
    if (k >= 0) return v.value(k);
  }
  const auto val = v.interpolate(x0);
  if (!val) fail(ErrorCode::invalid_argument, "base point is outside the sampled domain");
  return *val;
}

Section finish_section(Vec2 x0, Vec2 p, double t, std::vector<Vec2> pts) {
  pts.push_back(x0);
  Section s{x0, p, t, convex_hull(std::move(pts))};
  return s;
}

}  // namespace

Section extract_section(const GridFunction& v, Vec2 x0, Vec2 p, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) fail(ErrorCode::invalid_argument, "section height must be positive");
  if (!v.domain().contains(x0, 1e-12 * std::max(1.0, v.domain().extent())))
    fail(ErrorCode::invalid_argument, "base point is outside the domain");
  const double v0 = node_value(v, x0);
  const std::size_t n = v.size();
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) w[k] = v.value(k) - v0 - dot(p, v.node(k) - x0) - t;

  std::vector<Vec2> pts;
  static constexpr int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
  for (std::size_t k = 0; k < n; ++k) {
    if (w[k] > 0.0) continue;
    const auto [i, j] = v.lattice_index(k);
    bool has_outside = false;
    for (int d = 0; d < 4; ++d) {
      const long m = v.index_of(i + di[d], j + dj[d]);
      if (m < 0)
        fail(ErrorCode::section_not_compact,
             "section reaches the boundary of the computational domain");
      if (w[m] > 0.0) {
        has_outside = true;
        const double s = w[k] / (w[k] - w[m]);
        pts.push_back(v.node(k) + s * (v.node(m) - v.node(k)));
      }
    }
    if (has_outside) pts.push_back(v.node(k));
  }
  return finish_section(x0, p, t, std::move(pts));
}

Section extract_section(const PLConvexFunction& v, Vec2 x0, Vec2 p, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) fail(ErrorCode::invalid_argument, "section height must be positive");
  const auto v0 = v.evaluate(x0);
  if (!v0) fail(ErrorCode::invalid_argument, "base point is outside the hull of the sites");
  const std::size_t n = v.size();
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) {
    w[k] = v.heights()[k] - *v0 - dot(p, v.sites()[k] - x0) - t;
    if (v.active(k) && v.on_hull(k) && w[k] <= 0.0)
      fail(ErrorCode::section_not_compact, "section reaches the hull of the sites");
  }
  std::vector<Vec2> pts;
  const auto& tris = v.triangles();
  const auto& nb = v.face_neighbors();
  for (std::size_t f = 0; f < tris.size(); ++f) {
    for (int k = 0; k < 3; ++k) {
      const int a = tris[f][(k + 1) % 3], b = tris[f][(k + 2) % 3];
      // Visit each edge once: from the face with the larger index, or on the hull.
      if (nb[f][k] >= 0 && nb[f][k] > static_cast<int>(f)) continue;
      const bool ia = w[a] <= 0.0, ib = w[b] <= 0.0;
      if (ia) pts.push_back(v.sites()[a]);
      if (ib) pts.push_back(v.sites()[b]);
      if (ia != ib) {
        const double s = w[a] / (w[a] - w[b]);
        pts.push_back(v.sites()[a] + s * (v.sites()[b] - v.sites()[a]));
      }
    }
  }
  return finish_section(x0, p, t, std::move(pts));
}

EllipsoidFit john_ellipsoid(const Polygon& polygon, NormalizationConvention convention) {
  Polygon poly = convex_hull(polygon);
  if (poly.size() < 3 || signed_area(poly) < 1e-14)
    fail(ErrorCode::degenerate_polygon, "polygon area below 1e-14");

  // Whiten: centroid to the origin, unit second moment.
  const Vec2 m = centroid(poly);
  double sxx = 0, sxy = 0, syy = 0, area = 0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Vec2 a = poly[k] - m, b = poly[(k + 1) % poly.size()] - m;
    const double A = 0.5 * cross(a, b);
    const Vec2 s = a + b;
    sxx += A / 12.0 * (a.x * a.x + b.x * b.x + s.x * s.x);
    sxy += A / 12.0 * (a.x * a.y + b.x * b.y + s.x * s.y);
    syy += A / 12.0 * (a.y * a.y + b.y * b.y + s.y * s.y);
    area += A;
  }
  const Mat2 cov{sxx / area, sxy / area, sxy / area, syy / area};
  const Mat2 W = sqrt_spd(cov).inverse();
  const Mat2 Winv = W.inverse();

  std::vector<Vec2> normal;
  std::vector<double> offset;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Vec2 a = W * (poly[k] - m), b = W * (poly[(k + 1) % poly.size()] - m);
    const Vec2 e = b - a;
    const double len = norm(e);
    if (len == 0.0) continue;
    const Vec2 nrm{e.y / len, -e.x / len};
    normal.push_back(nrm);
    offset.push_back(dot(nrm, a));
  }
  const std::size_t nc = normal.size();
  double rho = std::numeric_limits<double>::infinity();
  for (double b : offset) rho = std::min(rho, b);
  if (!(rho > 0.0)) fail(ErrorCode::degenerate_polygon, "polygon has no interior");

  using Vec5 = Eigen::Matrix<double, 5, 1>;
  using Mat5 = Eigen::Matrix<double, 5, 5>;
  Vec5 z;
  z << 0.0, 0.0, 0.5 * rho, 0.0, 0.5 * rho;

  auto feasible_value = [&](const Vec5& x, double t, double& val) {
    const double D = x[2] * x[4] - x[3] * x[3];
    if (!(x[2] > 0.0) || !(D > 0.0)) return false;
    val = -t * std::log(D);
    for (std::size_t k = 0; k < nc; ++k) {
      const Vec2 a = normal[k];
      const double s = offset[k] - (a.x * x[0] + a.y * x[1]);
      const double w1 = x[2] * a.x + x[3] * a.y, w2 = x[3] * a.x + x[4] * a.y;
      const double g = s * s - w1 * w1 - w2 * w2;
      if (!(s > 0.0) || !(g > 0.0)) return false;
      val -= std::log(g);
    }
    return true;
  };

  double t = 1.0;
  const double gap_target = 1e-11;
  for (int outer = 0; outer < 60; ++outer) {
    for (int it = 0; it < 100; ++it) {
      Vec5 grad = Vec5::Zero();
      Mat5 hess = Mat5::Zero();
      const double D = z[2] * z[4] - z[3] * z[3];
      Eigen::Vector3d dD(z[4], -2.0 * z[3], z[2]);
      Eigen::Matrix3d ddD;
      ddD << 0, 0, 1, 0, -2, 0, 1, 0, 0;
      grad.segment<3>(2) += -t * dD / D;
      hess.block<3, 3>(2, 2) += -t * (ddD / D - dD * dD.transpose() / (D * D));
      for (std::size_t k = 0; k < nc; ++k) {
        const Vec2 a = normal[k];
        const double s = offset[k] - (a.x * z[0] + a.y * z[1]);
        const double w1 = z[2] * a.x + z[3] * a.y, w2 = z[3] * a.x + z[4] * a.y;
        const double g = s * s - w1 * w1 - w2 * w2;
        Vec5 dg;
        dg << -2 * s * a.x, -2 * s * a.y, -2 * a.x * w1, -2 * (a.y * w1 + a.x * w2), -2 * a.y * w2;
        Mat5 ddg = Mat5::Zero();
        ddg(0, 0) = 2 * a.x * a.x;
        ddg(0, 1) = ddg(1, 0) = 2 * a.x * a.y;
        ddg(1, 1) = 2 * a.y * a.y;
        Eigen::Matrix3d JtJ;
        JtJ << a.x * a.x, a.x * a.y, 0, a.x * a.y, a.x * a.x + a.y * a.y, a.x * a.y, 0, a.x * a.y,
            a.y * a.y;
        ddg.block<3, 3>(2, 2) = -2 * JtJ;
        grad += -dg / g;
        hess += dg * dg.transpose() / (g * g) - ddg / g;
      }
      const Vec5 step = hess.ldlt().solve(-grad);
      const double dec = -grad.dot(step);
      if (!(dec > 0.0) || dec < 1e-20) break;
      double f0 = 0.0;
      feasible_value(z, t, f0);
      double s = 1.0, f1 = 0.0;
      while (s > 1e-12 && !(feasible_value(z + s * step, t, f1) && f1 <= f0 - 0.25 * s * dec)) s *= 0.5;
      if (s <= 1e-12) break;
      z += s * step;
      if (dec < 1e-18) break;
    }
    if (2.0 * static_cast<double>(nc) / t < gap_target) break;
    t *= 8.0;
  }

  const Vec2 c_white{z[0], z[1]};
  const Mat2 B_white{z[2], z[3], z[3], z[4]};
  const Mat2 L = Winv * B_white;
  const Mat2 LLt = L * L.transpose();
  EllipsoidFit fit;
  fit.center = m + Winv * c_white;
  fit.B = sqrt_spd(LLt);
  fit.M = LLt.inverse();
  const double detB = fit.B.det();
  fit.scale = std::sqrt(detB);
  if (convention == NormalizationConvention::symmetric) {
    fit.A = (1.0 / fit.scale) * fit.B;
  } else {
    const SymmetricEigen e = eigen_symmetric(fit.B);
    fit.A = (1.0 / fit.scale) * (e.vectors * Mat2::diag(e.values[0], e.values[1]));
  }
  return fit;
}

double eccentricity(const EllipsoidFit& fit) { return singular_values(fit.A)[0]; }

double caffarelli_radius(double t, double mass) {
  if (mass == 0.0) fail(ErrorCode::divide_by_zero_mass, "section mass is zero");
  if (!(mass > 0.0) || !(t > 0.0)) fail(ErrorCode::invalid_argument, "height and mass must be positive");
  return t / std::sqrt(mass);
}

double balance_check(const Section& section, const EllipsoidFit& fit, double r) {
  if (!(r > 0.0)) fail(ErrorCode::invalid_argument, "radius must be positive");
  const Polygon& poly = section.polygon;
  if (poly.size() < 3) fail(ErrorCode::degenerate_polygon, "section polygon has fewer than 3 vertices");
  const Mat2 Ainv = fit.A.inverse();
  std::vector<Vec2> u(poly.size());
  for (std::size_t k = 0; k < poly.size(); ++k) u[k] = Ainv * (poly[k] - section.base);
  double outer = 0.0, dmin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < u.size(); ++k) {
    outer = std::max(outer, norm(u[k]) / r);
    dmin = std::min(dmin, segment_distance({0.0, 0.0}, u[k], u[(k + 1) % u.size()]));
  }
  const double inner = dmin > 0.0 ? r / dmin : std::numeric_limits<double>::infinity();
  return std::max(outer, inner);
}

double section_mass(const RhsField& f, const Polygon& polygon, int order) {
  return integrate_polygon([&f](Vec2 x) { return f(x); }, polygon, order);
}

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

bool ellipse_inside(const Domain2D& region, Vec2 c, const Mat2& L) {
  auto support = [&](Vec2 d) { return dot(c, d) + norm(L.transpose() * d); };
  switch (region.kind()) {
    case DomainKind::square: {
      const double w = region.size();
      return support({1, 0}) <= w && support({-1, 0}) <= w && support({0, 1}) <= w &&
             support({0, -1}) <= w;
    }
    case DomainKind::disk: {
      const double R = region.size();
      for (int k = 0; k < 720; ++k) {
        const double th = 2.0 * std::numbers::pi * k / 720;
        if (support({std::cos(th), std::sin(th)}) > R) return false;
      }
      return true;
    }
    case DomainKind::polygon: {
      const auto& v = region.vertices();
      for (std::size_t k = 0; k < v.size(); ++k) {
        const Vec2 e = v[(k + 1) % v.size()] - v[k];
        const Vec2 nrm = Vec2{e.y, -e.x} / norm(e);
        if (support(nrm) > dot(nrm, v[k])) return false;
      }
      return true;
    }
  }
  return false;
}

}  // namespace

DoublingEstimate doubling_constant(const RhsField& f, const Domain2D& region, std::size_t n_samples,
                                   std::uint64_t seed) {
  if (n_samples < 100) fail(ErrorCode::invalid_argument, "doubling estimate needs at least 100 samples");
  std::mt19937_64 rng(seed);
  double rmax = 0.0;
  if (region.kind() == DomainKind::disk) {
    rmax = region.size();
  } else {
    for (Vec2 v : region.vertices()) rmax = std::max(rmax, norm(v));
  }
  const double rmin = 1e-2;
  const double amax = region.diameter() / 4.0;
  if (!(rmax > rmin) || !(amax > rmin)) fail(ErrorCode::domain_too_small, "region too small for sampling");
  const double lr0 = std::log(rmin), lr1 = std::log(rmax);
  const double la0 = std::log(rmin), la1 = std::log(amax);

  const PlaneFunction density = [&f](Vec2 x) { return f(x); };
  DoublingEstimate est;
  est.running_max.reserve(n_samples);
  const std::size_t max_rejections = 1000 * n_samples;
  while (est.samples < n_samples) {
    const double rho = std::exp(lr0 + uniform01(rng) * (lr1 - lr0));
    const double th = 2.0 * std::numbers::pi * uniform01(rng);
    const double s1 = std::exp(la0 + uniform01(rng) * (la1 - la0));
    const double s2 = std::exp(la0 + uniform01(rng) * (la1 - la0));
    const double phi = std::numbers::pi * uniform01(rng);
    const Vec2 c{rho * std::cos(th), rho * std::sin(th)};
    const Mat2 L = Mat2::rotation(phi) * Mat2::diag(s1, s2);
    if (!ellipse_inside(region, c, L)) {
      if (++est.rejected > max_rejections)
        fail(ErrorCode::domain_too_small, "ellipse sampling rejected too many candidates");
      continue;
    }
    const double full = integrate_ellipse(density, c, L);
    const double half = integrate_ellipse(density, c, 0.5 * L);
    const double ratio = half > 0.0 ? full / half : std::numeric_limits<double>::infinity();
    est.estimate = std::max(est.estimate, ratio);
    est.running_max.push_back(est.estimate);
    ++est.samples;
  }
  return est;
}

std::vector<bool> sublevel_compactness(const GridFunction& v, const std::vector<double>& levels) {
  std::size_t kmin = 0;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v.value(k) < v.value(kmin)) kmin = k;
  const Vec2 x0 = v.node(kmin);
  const double vmin = v.value(kmin);
  const double margin = 2.0 * v.h();
  std::vector<bool> out;
  for (double level : levels) {
    if (level < vmin) {
      out.push_back(true);
      continue;
    }
    if (level == vmin) {
      out.push_back(v.domain().boundary_distance(x0) >= margin);
      continue;
    }
    try {
      const Section s = extract_section(v, x0, {0.0, 0.0}, level - vmin);
      bool ok = true;
      for (Vec2 p : s.polygon) ok = ok && v.domain().boundary_distance(p) >= margin;
      out.push_back(ok);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::section_not_compact) throw;
      out.push_back(false);
    }
  }
  return out;
}

}  // namespace tma
