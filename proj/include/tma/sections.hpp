#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "tma/geometry.hpp"
#include "tma/grid.hpp"
#include "tma/ma_measure.hpp"

namespace tma {

// Sub-level set {x : v(x) <= v(x0) + <p, x - x0> + t}.
struct Section {
  Vec2 base;
  Vec2 slope;
  double height = 0.0;
  Polygon polygon;  // counterclockwise
};

// Nodes below the level plus linear crossings on lattice edges. Throws
// SectionNotCompact when a node on the lattice boundary is inside.
Section extract_section(const GridFunction& v, Vec2 x0, Vec2 p, double t);
// Sites below the level plus crossings on triangle edges; hull sites inside
// raise SectionNotCompact.
Section extract_section(const PLConvexFunction& v, Vec2 x0, Vec2 p, double t);

enum class NormalizationConvention {
  symmetric,          // A = B / sqrt(det B), B the SPD shape matrix
  rotation_diagonal,  // A = Q Lambda / sqrt(det Lambda), B = Q Lambda Q^T
};

struct EllipsoidFit {
  Vec2 center;
  Mat2 M;      // {x : (x - c)^T M (x - c) <= 1}
  Mat2 B;      // ellipse = center + B (unit disk), B = M^(-1/2)
  Mat2 A;      // det A = 1
  double scale = 0.0;  // sqrt(det B)
  double k0 = std::numeric_limits<double>::quiet_NaN();
};

// Maximum-area inscribed ellipse of a convex polygon (interior point method).
EllipsoidFit john_ellipsoid(const Polygon& polygon,
                            NormalizationConvention convention = NormalizationConvention::symmetric);

double eccentricity(const EllipsoidFit& fit);

// r = t * mass^(-1/2)
double caffarelli_radius(double t, double mass);

// Smallest k0 with A B_{r/k0} in S - x0 and S - x0 in A B_{k0 r}.
double balance_check(const Section& section, const EllipsoidFit& fit, double r);

struct DoublingEstimate {
  double estimate = 0.0;
  std::size_t samples = 0;
  std::size_t rejected = 0;
  std::vector<double> running_max;  // estimate after each accepted sample
};

// sup over random ellipses E in the region of mu(E) / mu(E/2), mu = f dx.
// Centres at log-uniform distance in [1e-2, R] with uniform angle, semi-axes
// log-uniform in [1e-2, diam/4], uniform orientation; rejection keeps E
// inside the region.
DoublingEstimate doubling_constant(const RhsField& f, const Domain2D& region,
                                   std::size_t n_samples, std::uint64_t seed);

// Per level: the section {v <= level} around the minimum node stays at least
// 2h away from the domain boundary.
std::vector<bool> sublevel_compactness(const GridFunction& v, const std::vector<double>& levels);

// Integral of f over a convex polygon.
double section_mass(const RhsField& f, const Polygon& polygon, int order = 4);

}  // namespace tma
