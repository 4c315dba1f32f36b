#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tma/geometry.hpp"

namespace tma {

enum class DomainKind { square, disk, polygon };

// Convex planar domain. Squares and disks are centred at the origin.
class Domain2D {
 public:
  static Domain2D square(double half_width);
  static Domain2D disk(double radius);
  // Vertices counterclockwise, strictly convex.
  static Domain2D polygon(std::vector<Vec2> vertices);

  DomainKind kind() const { return kind_; }
  double size() const { return size_; }  // half-width or radius
  const std::vector<Vec2>& vertices() const { return vertices_; }

  bool contains(Vec2 p, double tol = 0.0) const;
  // Distance from an interior point to the boundary (0 outside).
  double boundary_distance(Vec2 p) const;
  // Half-width of the smallest origin-centred square containing the domain.
  double extent() const;
  double diameter() const;
  double area() const;

  std::string kind_name() const;
  friend bool operator==(const Domain2D&, const Domain2D&) = default;

 private:
  DomainKind kind_ = DomainKind::square;
  double size_ = 1.0;
  std::vector<Vec2> vertices_;
};

// Values of a function on the lattice hZ^2 restricted to a domain. Nodes are
// ordered lexicographically by (x2, x1); lattice rows are contiguous.
class GridFunction {
 public:
  GridFunction(Domain2D domain, double h, std::vector<Vec2> nodes,
               std::vector<double> values);

  const Domain2D& domain() const { return domain_; }
  double h() const { return h_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::vector<double>& values() const { return values_; }
  Vec2 node(std::size_t k) const { return nodes_[k]; }
  double value(std::size_t k) const { return values_[k]; }
  std::array<int, 2> lattice_index(std::size_t k) const { return ij_[k]; }

  // Node index of lattice point (i, j), or -1.
  long index_of(int i, int j) const;

  struct Row {
    int j;
    int i_first;
    std::size_t first;  // node index of the first entry
    std::size_t count;
  };
  const std::vector<Row>& rows() const { return rows_; }

  // Bilinear interpolation inside a lattice cell whose four corners are
  // nodes; nullopt otherwise.
  std::optional<double> interpolate(Vec2 p) const;

  GridFunction with_values(std::vector<double> values) const;

  friend bool operator==(const GridFunction& a, const GridFunction& b) {
    return a.domain_ == b.domain_ && a.h_ == b.h_ && a.nodes_ == b.nodes_ &&
           a.values_ == b.values_;
  }

 private:
  Domain2D domain_;
  double h_;
  std::vector<Vec2> nodes_;
  std::vector<double> values_;
  std::vector<std::array<int, 2>> ij_;
  std::vector<Row> rows_;
};

// Lattice nodes of pitch h inside the domain, ordered by (x2, x1).
std::vector<Vec2> lattice_nodes(const Domain2D& domain, double h);

using Field = std::function<double(Vec2)>;

GridFunction sample(const Field& field, const Domain2D& domain, double h);

enum class RhsKind { constant, dual_translator, degenerate, custom_radial };

class RhsField {
 public:
  static RhsField constant(double value = 1.0);
  // (eta + |x|^2)^(1/(2 alpha) - 2)
  static RhsField dual_translator(double alpha, double eta = 1.0);
  // |x1|^(1/alpha - 4), zero on the axis x1 = 0
  static RhsField degenerate(double alpha);
  static RhsField custom_radial(std::function<double(double)> profile,
                                std::string label = "custom_radial");

  RhsKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double eta() const { return eta_; }
  double constant_value() const { return value_; }
  std::string describe() const;

  double operator()(Vec2 x) const;

 private:
  RhsKind kind_ = RhsKind::constant;
  double alpha_ = 0.0;
  double eta_ = 1.0;
  double value_ = 1.0;
  std::function<double(double)> radial_;
  std::string label_;
};

struct RhsConditionReport {
  std::vector<double> radii;
  std::vector<double> deviation;  // sup over the circle of ||x|^(4-1/a) f - 1|
  bool eventually_within = false;  // largest three radii all <= epsilon
};

RhsConditionReport check_rhs_condition(const RhsField& f, double alpha,
                                       double epsilon,
                                       const std::vector<double>& radii,
                                       int n_angles = 256);

void save(const GridFunction& gf, const std::string& path);
GridFunction load(const std::string& path);

std::string to_gfn_string(const GridFunction& gf);
GridFunction from_gfn_string(const std::string& text);

// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

// Shortest decimal that parses back to the same double.
std::string format_double(double v);

}  // namespace tma
