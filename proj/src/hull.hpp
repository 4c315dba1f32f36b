#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "tma/geometry.hpp"

namespace tma::detail {

// Regular triangulation of weighted planar points, i.e. the projection of the
// lower convex hull of the lifted points (x_i, h_i). Hull edges are closed
// off by "ghost" triangles sharing the vertex kGhost, so every vertex star is
// a closed cycle. Points on or above the current lower hull are hidden.
class RegularTriangulation {
 public:
  static constexpr int kGhost = -1;

  struct Tri {
    std::array<int, 3> v;  // counterclockwise; a ghost vertex is always v[2]
    std::array<int, 3> n;  // n[k] is the neighbour across the edge opposite v[k]
    bool alive = true;
  };

  RegularTriangulation(std::vector<Vec2> points, std::vector<double> heights);

  std::size_t num_points() const { return pts_.size(); }
  Vec2 point(int i) const { return geo_[i]; }
  double height(int i) const { return hts_[i]; }
  bool active(int i) const { return vtri_[i] >= 0; }
  const std::vector<Tri>& tris() const { return tris_; }
  static bool is_ghost(const Tri& t) { return t.v[2] == kGhost; }

  // Triangles around vertex i, counterclockwise, ghosts included.
  std::vector<int> star(int i) const;

  // Lowers site i to new_height (<= current) and repairs the hull.
  void lower(int i, double new_height);

  // Gradient cell site i would have at new_height (<= current), computed
  // without changing the structure. Empty if i would stay hidden.
  // Sets *unbounded when the cell reaches a hull edge.
  Polygon trial_cell(int i, double new_height, bool* unbounded = nullptr) const;

  static Vec2 plane_gradient(Vec2 a, double ha, Vec2 b, double hb, Vec2 c, double hc);
  Vec2 face_gradient(int t) const;

 private:
  void build();
  void build_initial(const std::vector<int>& order, std::size_t& next);
  void insert(int s);
  int locate(Vec2 p, int start) const;
  bool in_conflict(int t, Vec2 p, double hp) const;
  // Triangles in conflict with (p, hp), grown from the seeds.
  std::vector<int> cavity(const std::vector<int>& seeds, Vec2 p, double hp) const;
  // Boundary edges (u, v, outside triangle) of a cavity, in no particular order.
  struct BoundaryEdge {
    int u, v, outside;
  };
  std::vector<BoundaryEdge> cavity_boundary(const std::vector<int>& cav) const;
  void retriangulate(int s, const std::vector<int>& cav);
  int new_tri(std::array<int, 3> v, std::array<int, 3> n);
  void set_neighbor_across(int t, int u, int v, int nb);
  int any_alive() const;

  std::vector<Vec2> geo_;
  std::vector<Vec2> pts_;  // coordinates seen by the predicates
  std::vector<double> hts_;
  std::vector<Tri> tris_;
  std::vector<int> free_;
  std::vector<int> vtri_;  // one incident triangle per active vertex, -1 if hidden
  mutable std::vector<std::uint32_t> mark_;
  mutable std::uint32_t stamp_ = 0;
  mutable std::mt19937 rng_{12345u};
  int last_ = -1;
};

}  // namespace tma::detail
