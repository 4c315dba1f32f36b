#include "hull.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "tma/error.hpp"
#include "tma/predicates.hpp"

namespace tma::detail {
namespace {

bool lex_less(Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }

// p collinear with a and b: is it strictly inside the segment?
bool strictly_between(Vec2 a, Vec2 b, Vec2 p) {
  return (lex_less(a, p) && lex_less(p, b)) || (lex_less(b, p) && lex_less(p, a));
}

int index_in(const RegularTriangulation::Tri& t, int v) {
  for (int k = 0; k < 3; ++k)
    if (t.v[k] == v) return k;
  return -1;
}

void rotate_ghost_last(RegularTriangulation::Tri& t) {
  while (t.v[2] != RegularTriangulation::kGhost &&
         (t.v[0] == RegularTriangulation::kGhost || t.v[1] == RegularTriangulation::kGhost)) {
    std::rotate(t.v.begin(), t.v.begin() + 1, t.v.end());
    std::rotate(t.n.begin(), t.n.begin() + 1, t.n.end());
  }
}

}  // namespace

RegularTriangulation::RegularTriangulation(std::vector<Vec2> points, std::vector<double> heights)
    : geo_(std::move(points)), hts_(std::move(heights)) {
  pts_ = lattice_keys(geo_);
  if (geo_.size() != hts_.size())
    fail(ErrorCode::invalid_argument, "site and height counts differ");
  for (std::size_t i = 0; i < pts_.size(); ++i) {
    if (!std::isfinite(geo_[i].x) || !std::isfinite(geo_[i].y) || !std::isfinite(hts_[i]))
      fail(ErrorCode::nonfinite_value, "site or height is not finite");
  }
  if (pts_.size() < 3) fail(ErrorCode::degenerate_input, "need at least 3 sites");
  vtri_.assign(pts_.size(), -1);
  build();
}

Vec2 RegularTriangulation::plane_gradient(Vec2 a, double ha, Vec2 b, double hb, Vec2 c,
                                          double hc) {
  const double bx = b.x - a.x, by = b.y - a.y, cx = c.x - a.x, cy = c.y - a.y;
  const double db = hb - ha, dc = hc - ha;
  const double det = bx * cy - cx * by;
  return {(db * cy - dc * by) / det, (dc * bx - db * cx) / det};
}

Vec2 RegularTriangulation::face_gradient(int t) const {
  const Tri& T = tris_[t];
  return plane_gradient(geo_[T.v[0]], hts_[T.v[0]], geo_[T.v[1]], hts_[T.v[1]], geo_[T.v[2]],
                        hts_[T.v[2]]);
}

int RegularTriangulation::new_tri(std::array<int, 3> v, std::array<int, 3> n) {
  Tri t{v, n, true};
  if (!free_.empty()) {
    const int id = free_.back();
    free_.pop_back();
    tris_[id] = t;
    return id;
  }
  tris_.push_back(t);
  return static_cast<int>(tris_.size()) - 1;
}

int RegularTriangulation::any_alive() const {
  if (last_ >= 0 && vtri_[last_] >= 0) return vtri_[last_];
  for (std::size_t t = 0; t < tris_.size(); ++t)
    if (tris_[t].alive) return static_cast<int>(t);
  return -1;
}

void RegularTriangulation::build() {
  std::vector<int> order(pts_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return lex_less(pts_[a], pts_[b]); });
  std::size_t next = 0;
  build_initial(order, next);
  for (; next < order.size(); ++next) insert(order[next]);
}

void RegularTriangulation::build_initial(const std::vector<int>& order, std::size_t& next) {
  const std::size_t n = order.size();
  const int a = order[0];
  std::size_t jb = 1;
  while (jb < n && pts_[order[jb]] == pts_[a]) ++jb;
  if (jb == n) fail(ErrorCode::degenerate_input, "all sites coincide");
  const int b = order[jb];
  std::size_t jq = jb + 1;
  while (jq < n && orient2d(pts_[a], pts_[b], pts_[order[jq]]) == 0) ++jq;
  if (jq == n) fail(ErrorCode::degenerate_input, "all sites are collinear");
  const int q = order[jq];

  // Lower chain of the collinear run, parametrised by one coordinate.
  const bool use_x = pts_[a].x != pts_[b].x;
  auto param = [&](int i) { return use_x ? pts_[i].x : pts_[i].y; };
  std::vector<int> chain;
  for (std::size_t k = 0; k < jq; ++k) {
    const int c = order[k];
    if (!chain.empty() && pts_[chain.back()] == pts_[c]) {
      if (hts_[c] < hts_[chain.back()]) chain.back() = c;
      continue;
    }
    while (chain.size() >= 2) {
      const int s1 = chain[chain.size() - 2], s2 = chain.back();
      if (orient2d({param(s1), hts_[s1]}, {param(s2), hts_[s2]}, {param(c), hts_[c]}) > 0) break;
      chain.pop_back();
    }
    chain.push_back(c);
  }

  const bool ccw = orient2d(pts_[chain[0]], pts_[chain[1]], pts_[q]) > 0;
  std::vector<std::array<int, 3>> faces;
  const std::size_t m = chain.size();
  for (std::size_t k = 0; k + 1 < m; ++k) {
    if (ccw)
      faces.push_back({chain[k], chain[k + 1], q});
    else
      faces.push_back({chain[k + 1], chain[k], q});
  }
  // Counterclockwise hull cycle; ghosts carry each hull edge reversed.
  std::vector<int> cycle;
  if (ccw) {
    cycle = chain;
  } else {
    cycle.assign(chain.rbegin(), chain.rend());
  }
  cycle.push_back(q);
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    const int u = cycle[k], v = cycle[(k + 1) % cycle.size()];
    faces.push_back({v, u, kGhost});
  }

  std::map<std::pair<int, int>, std::pair<int, int>> edge_of;
  for (const auto& f : faces) {
    const int id = new_tri(f, {-1, -1, -1});
    for (int k = 0; k < 3; ++k) edge_of[{f[(k + 1) % 3], f[(k + 2) % 3]}] = {id, k};
  }
  for (std::size_t t = 0; t < tris_.size(); ++t) {
    Tri& T = tris_[t];
    for (int k = 0; k < 3; ++k) {
      auto it = edge_of.find({T.v[(k + 2) % 3], T.v[(k + 1) % 3]});
      if (it == edge_of.end()) fail(ErrorCode::internal, "initial fan is not closed");
      T.n[k] = it->second.first;
    }
    for (int v : T.v)
      if (v != kGhost) vtri_[v] = static_cast<int>(t);
  }
  last_ = q;
  next = jq + 1;
}

bool RegularTriangulation::in_conflict(int t, Vec2 p, double hp) const {
  const Tri& T = tris_[t];
  if (!is_ghost(T)) {
    const int a = T.v[0], b = T.v[1], c = T.v[2];
    return orient_lifted(pts_[a], hts_[a], pts_[b], hts_[b], pts_[c], hts_[c], p, hp) > 0;
  }
  const Vec2 a = pts_[T.v[0]], b = pts_[T.v[1]];
  const int o = orient2d(a, b, p);
  if (o != 0) return o > 0;
  if (strictly_between(a, b, p)) return in_conflict(T.n[2], p, hp);
  // Beyond the end of a hull edge: conflict iff the lifted point is below the
  // lifted line of the edge, which then hides the middle point.
  const bool use_x = a.x != b.x;
  std::array<Vec2, 3> q{Vec2{use_x ? a.x : a.y, hts_[T.v[0]]},
                        Vec2{use_x ? b.x : b.y, hts_[T.v[1]]}, Vec2{use_x ? p.x : p.y, hp}};
  std::sort(q.begin(), q.end(), [](Vec2 l, Vec2 r) { return l.x < r.x; });
  return orient2d(q[0], q[1], q[2]) < 0;
}

int RegularTriangulation::locate(Vec2 p, int start) const {
  int t = (start >= 0 && tris_[start].alive) ? start : any_alive();
  int prev = -1;
  const std::size_t limit = 4 * tris_.size() + 64;
  for (std::size_t step = 0; step < limit; ++step) {
    const Tri& T = tris_[t];
    if (is_ghost(T)) {
      if (orient2d(pts_[T.v[0]], pts_[T.v[1]], p) > 0) return t;
      prev = t;
      t = T.n[2];
      continue;
    }
    const int k0 = static_cast<int>(rng_() % 3u);
    bool moved = false;
    for (int kk = 0; kk < 3; ++kk) {
      const int k = (k0 + kk) % 3;
      const int nb = T.n[k];
      if (nb == prev) continue;
      if (orient2d(pts_[T.v[(k + 1) % 3]], pts_[T.v[(k + 2) % 3]], p) < 0) {
        prev = t;
        t = nb;
        moved = true;
        break;
      }
    }
    if (!moved) return t;
  }
  // Walk did not settle; scan everything.
  for (std::size_t s = 0; s < tris_.size(); ++s) {
    const Tri& T = tris_[s];
    if (!T.alive) continue;
    if (is_ghost(T)) {
      if (orient2d(pts_[T.v[0]], pts_[T.v[1]], p) > 0) return static_cast<int>(s);
      continue;
    }
    bool inside = true;
    for (int k = 0; k < 3 && inside; ++k)
      inside = orient2d(pts_[T.v[(k + 1) % 3]], pts_[T.v[(k + 2) % 3]], p) >= 0;
    if (inside) return static_cast<int>(s);
  }
  fail(ErrorCode::internal, "point location failed");
}

std::vector<int> RegularTriangulation::cavity(const std::vector<int>& seeds, Vec2 p,
                                              double hp) const {
  if (mark_.size() < tris_.size()) mark_.resize(tris_.size(), 0);
  ++stamp_;
  std::vector<int> out;
  std::vector<int> stack;
  for (int s : seeds) {
    if (mark_[s] == stamp_) continue;
    mark_[s] = stamp_;
    out.push_back(s);
    stack.push_back(s);
  }
  // Triangles found not in conflict get a second stamp so they are tested once.
  ++stamp_;
  const std::uint32_t in_cav = stamp_ - 1, rejected = stamp_;
  while (!stack.empty()) {
    const int t = stack.back();
    stack.pop_back();
    for (int nb : tris_[t].n) {
      if (mark_[nb] == in_cav || mark_[nb] == rejected) continue;
      if (in_conflict(nb, p, hp)) {
        mark_[nb] = in_cav;
        out.push_back(nb);
        stack.push_back(nb);
      } else {
        mark_[nb] = rejected;
      }
    }
  }
  return out;
}

std::vector<RegularTriangulation::BoundaryEdge> RegularTriangulation::cavity_boundary(
    const std::vector<int>& cav) const {
  if (mark_.size() < tris_.size()) mark_.resize(tris_.size(), 0);
  ++stamp_;
  for (int t : cav) mark_[t] = stamp_;
  std::vector<BoundaryEdge> edges;
  for (int t : cav) {
    const Tri& T = tris_[t];
    for (int k = 0; k < 3; ++k) {
      const int nb = T.n[k];
      if (mark_[nb] == stamp_) continue;
      edges.push_back({T.v[(k + 1) % 3], T.v[(k + 2) % 3], nb});
    }
  }
  return edges;
}

void RegularTriangulation::set_neighbor_across(int t, int u, int v, int nb) {
  Tri& T = tris_[t];
  for (int k = 0; k < 3; ++k) {
    if (T.v[(k + 1) % 3] == u && T.v[(k + 2) % 3] == v) {
      T.n[k] = nb;
      return;
    }
  }
  fail(ErrorCode::internal, "neighbour edge not found");
}

void RegularTriangulation::retriangulate(int s, const std::vector<int>& cav) {
  const std::vector<BoundaryEdge> edges = cavity_boundary(cav);
  std::unordered_map<int, int> starts, ends;
  std::vector<int> created;
  created.reserve(edges.size());
  for (const BoundaryEdge& e : edges) {
    const int id = new_tri({e.u, e.v, s}, {-1, -1, e.outside});
    created.push_back(id);
    starts[e.u] = id;
    ends[e.v] = id;
  }
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const BoundaryEdge& e = edges[k];
    Tri& T = tris_[created[k]];
    auto sn = starts.find(e.v);
    auto en = ends.find(e.u);
    if (sn == starts.end() || en == ends.end())
      fail(ErrorCode::internal, "cavity boundary is not a cycle");
    T.n[0] = sn->second;  // across (v, s)
    T.n[1] = en->second;  // across (s, u)
    set_neighbor_across(e.outside, e.v, e.u, created[k]);
  }
  std::unordered_set<int> on_boundary;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    on_boundary.insert(edges[k].u);
    if (edges[k].u != kGhost) vtri_[edges[k].u] = created[k];
  }
  vtri_[s] = created.front();
  for (int t : cav) {
    for (int v : tris_[t].v) {
      if (v == kGhost || v == s || on_boundary.count(v)) continue;
      vtri_[v] = -1;
    }
    tris_[t].alive = false;
    free_.push_back(t);
  }
  for (int id : created) rotate_ghost_last(tris_[id]);
  last_ = s;
}

void RegularTriangulation::insert(int s) {
  const int start = (last_ >= 0 && vtri_[last_] >= 0) ? vtri_[last_] : any_alive();
  const int t = locate(pts_[s], start);
  if (!in_conflict(t, pts_[s], hts_[s])) {
    vtri_[s] = -1;
    return;
  }
  retriangulate(s, cavity({t}, pts_[s], hts_[s]));
}

std::vector<int> RegularTriangulation::star(int i) const {
  std::vector<int> out;
  const int t0 = vtri_[i];
  if (t0 < 0) return out;
  int t = t0;
  do {
    out.push_back(t);
    const int k = index_in(tris_[t], i);
    t = tris_[t].n[(k + 1) % 3];
  } while (t != t0 && out.size() <= tris_.size());
  return out;
}

void RegularTriangulation::lower(int i, double new_height) {
  if (!std::isfinite(new_height)) fail(ErrorCode::nonfinite_value, "height is not finite");
  if (vtri_[i] >= 0) {
    const std::vector<int> seeds = star(i);
    hts_[i] = new_height;
    retriangulate(i, cavity(seeds, pts_[i], new_height));
  } else {
    hts_[i] = new_height;
    insert(i);
  }
}

Polygon RegularTriangulation::trial_cell(int i, double new_height, bool* unbounded) const {
  if (unbounded) *unbounded = false;
  const Vec2 p = pts_[i];
  std::vector<int> seeds;
  if (vtri_[i] >= 0) {
    seeds = star(i);
  } else {
    const int start = (last_ >= 0 && vtri_[last_] >= 0) ? vtri_[last_] : any_alive();
    const int t = locate(p, start);
    if (!in_conflict(t, p, new_height)) return {};
    seeds.push_back(t);
  }
  const std::vector<BoundaryEdge> edges = cavity_boundary(cavity(seeds, p, new_height));
  std::unordered_map<int, std::size_t> by_start;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (edges[k].u == kGhost || edges[k].v == kGhost) {
      if (unbounded) *unbounded = true;
      return {};
    }
    by_start[edges[k].u] = k;
  }
  Polygon cell;
  cell.reserve(edges.size());
  std::size_t k = 0;
  for (std::size_t step = 0; step < edges.size(); ++step) {
    const BoundaryEdge& e = edges[k];
    cell.push_back(
        plane_gradient(geo_[e.u], hts_[e.u], geo_[e.v], hts_[e.v], geo_[i], new_height));
    auto it = by_start.find(e.v);
    if (it == by_start.end()) fail(ErrorCode::internal, "trial cavity is not a cycle");
    k = it->second;
  }
  return cell;
}

}  // namespace tma::detail
