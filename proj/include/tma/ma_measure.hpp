#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tma/geometry.hpp"

namespace tma {

// Convex piecewise-linear function: the lower convex envelope of lifted
// sites. Immutable once built.
class PLConvexFunction {
 public:
  PLConvexFunction(std::vector<Vec2> sites, std::vector<double> heights);

  std::size_t size() const { return sites_.size(); }
  const std::vector<Vec2>& sites() const { return sites_; }
  const std::vector<double>& heights() const { return heights_; }
  // Lower-hull faces, counterclockwise site triples.
  const std::vector<std::array<int, 3>>& triangles() const { return tris_; }
  // Neighbour face across the edge opposite corner k, -1 on the hull.
  const std::vector<std::array<int, 3>>& face_neighbors() const { return nbrs_; }
  const std::vector<Vec2>& face_gradients() const { return grads_; }

  // False for sites lifted above the envelope.
  bool active(std::size_t i) const { return active_[i]; }
  // Site lies on the boundary of the convex hull of all sites.
  bool on_hull(std::size_t i) const { return on_hull_[i]; }
  bool interior(std::size_t i) const { return !on_hull_[i]; }
  std::vector<int> interior_sites() const;

  // Faces around an active site, counterclockwise. For hull sites the ring
  // is open and starts at a hull edge.
  std::span<const int> ring(std::size_t i) const {
    return {ring_faces_.data() + ring_off_[i], ring_off_[i + 1] - ring_off_[i]};
  }
  // Vertex of each ring face that follows the site counterclockwise.
  std::span<const int> ring_vertices(std::size_t i) const {
    return {ring_verts_.data() + ring_off_[i], ring_off_[i + 1] - ring_off_[i]};
  }

  // Envelope value at a point of the hull (max of face planes); nullopt
  // outside the hull.
  std::optional<double> evaluate(Vec2 x) const;
  double face_value(std::size_t face, Vec2 x) const;

  PLConvexFunction with_heights(std::vector<double> heights) const;

 private:
  std::vector<Vec2> sites_;
  std::vector<double> heights_;
  std::vector<std::array<int, 3>> tris_;
  std::vector<std::array<int, 3>> nbrs_;
  std::vector<Vec2> grads_;
  std::vector<bool> active_;
  std::vector<bool> on_hull_;
  std::vector<std::size_t> ring_off_;
  std::vector<int> ring_faces_;
  std::vector<int> ring_verts_;
  Polygon hull_;
};

PLConvexFunction lower_envelope(std::vector<Vec2> sites, std::vector<double> heights);

// Flags sites on the boundary of their convex hull (exact).
std::vector<bool> hull_boundary_flags(const std::vector<Vec2>& sites);

struct SubgradientCell {
  int site = -1;
  Polygon polygon;  // gradient space, counterclockwise
  double area = 0.0;
};

// Cells of all interior sites; hidden interior sites get an empty cell.
std::vector<SubgradientCell> subgradient_cells(const PLConvexFunction& f);
SubgradientCell subgradient_cell(const PLConvexFunction& f, std::size_t site);

struct MAMeasure {
  std::vector<double> masses;  // per site, zero on hull sites
  double total = 0.0;
};
MAMeasure ma_measure(const PLConvexFunction& f);

double ma_mass(const std::vector<SubgradientCell>& cells, const std::vector<int>& sites);

using GradientWeight = std::function<double(Vec2)>;

// Per-cell integral of w over the cell polygon (triangle fan quadrature).
std::vector<double> weighted_mass(const std::vector<SubgradientCell>& cells,
                                  const GradientWeight& w, int order = 4);

// Spherical area of the Gauss image: weight (1 + |y|^2)^(-3/2).
double gauss_map_mass(const std::vector<SubgradientCell>& cells, int order = 4);

struct TranslatorIdentity {
  double mass = 0.0;          // Monge-Ampere mass of the site subset
  double rhs_integral = 0.0;  // sum over faces of (1+|Du|^2)^e * area share
  double residual = 0.0;      // |mass - rhs_integral|
  double relative = 0.0;      // residual / rhs_integral
};

// Compares the Monge-Ampere mass of the subset with the integral of
// (1 + |Du|^2)^exponent over the barycentric regions of its sites.
TranslatorIdentity check_translator_identity_exponent(const PLConvexFunction& f,
                                                      double exponent,
                                                      const std::vector<int>& sites);
// exponent = 2 - 1/(2 alpha)
TranslatorIdentity check_translator_identity(const PLConvexFunction& f, double alpha,
                                             const std::vector<int>& sites);

// Jacobian weights of the masses: for each interior edge (i, j) the length
// of the dual cell edge divided by |x_i - x_j|.
struct MassJacobian {
  std::vector<std::array<int, 2>> edges;
  std::vector<double> weights;
};
MassJacobian mass_jacobian(const PLConvexFunction& f);

std::string cells_to_csv(const std::vector<SubgradientCell>& cells);
std::vector<SubgradientCell> cells_from_csv(const std::string& text);

}  // namespace tma
