#include "tma/ma_measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hull.hpp"
#include "tma/error.hpp"
#include "tma/grid.hpp"
#include "tma/predicates.hpp"
#include "tma/quadrature.hpp"

namespace tma {

std::vector<bool> hull_boundary_flags(const std::vector<Vec2>& sites) {
  const std::vector<Vec2> key = lattice_keys(sites);
  const std::vector<std::size_t> idx = convex_hull_indices(sites);
  std::vector<bool> flags(sites.size(), false);
  const std::size_t m = idx.size();
  if (m < 3) {
    std::fill(flags.begin(), flags.end(), true);
    return flags;
  }
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const Vec2 p = key[i];
    for (std::size_t k = 0; k < m; ++k) {
      const Vec2 a = key[idx[k]], b = key[idx[(k + 1) % m]];
      if (p.x < std::min(a.x, b.x) || p.x > std::max(a.x, b.x) || p.y < std::min(a.y, b.y) ||
          p.y > std::max(a.y, b.y))
        continue;
      if (orient2d(a, b, p) == 0) {
        flags[i] = true;
        break;
      }
    }
  }
  return flags;
}

PLConvexFunction::PLConvexFunction(std::vector<Vec2> sites, std::vector<double> heights)
    : sites_(std::move(sites)), heights_(std::move(heights)) {
  const detail::RegularTriangulation rt(sites_, heights_);
  const auto& all = rt.tris();
  std::vector<int> id(all.size(), -1);
  for (std::size_t t = 0; t < all.size(); ++t) {
    if (!all[t].alive || detail::RegularTriangulation::is_ghost(all[t])) continue;
    id[t] = static_cast<int>(tris_.size());
    tris_.push_back(all[t].v);
    grads_.push_back(rt.face_gradient(static_cast<int>(t)));
  }
  nbrs_.resize(tris_.size());
  for (std::size_t t = 0; t < all.size(); ++t) {
    if (id[t] < 0) continue;
    for (int k = 0; k < 3; ++k) nbrs_[id[t]][k] = id[all[t].n[k]];
  }

  const std::size_t n = sites_.size();
  active_.resize(n);
  on_hull_ = hull_boundary_flags(sites_);
  hull_ = convex_hull(sites_);
  ring_off_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    active_[i] = rt.active(static_cast<int>(i));
    if (!active_[i]) {
      ring_off_[i + 1] = ring_faces_.size();
      continue;
    }
    std::vector<int> st = rt.star(static_cast<int>(i));
    // Start right after the ghosts so that the finite faces are contiguous.
    std::size_t start = 0;
    for (std::size_t k = 0; k < st.size(); ++k) {
      if (detail::RegularTriangulation::is_ghost(all[st[k]]) &&
          !detail::RegularTriangulation::is_ghost(all[st[(k + 1) % st.size()]])) {
        start = (k + 1) % st.size();
        break;
      }
    }
    for (std::size_t k = 0; k < st.size(); ++k) {
      const int t = st[(start + k) % st.size()];
      if (id[t] < 0) continue;
      const auto& v = all[t].v;
      const int pos = v[0] == static_cast<int>(i) ? 0 : (v[1] == static_cast<int>(i) ? 1 : 2);
      ring_faces_.push_back(id[t]);
      ring_verts_.push_back(v[(pos + 1) % 3]);
    }
    ring_off_[i + 1] = ring_faces_.size();
  }
}

std::vector<int> PLConvexFunction::interior_sites() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < sites_.size(); ++i)
    if (!on_hull_[i]) out.push_back(static_cast<int>(i));
  return out;
}

double PLConvexFunction::face_value(std::size_t face, Vec2 x) const {
  const int a = tris_[face][0];
  return heights_[a] + dot(grads_[face], x - sites_[a]);
}

std::optional<double> PLConvexFunction::evaluate(Vec2 x) const {
  const double scale = std::max(1.0, norm(x));
  if (!convex_contains(hull_, x, 1e-12 * scale)) return std::nullopt;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < tris_.size(); ++f) best = std::max(best, face_value(f, x));
  return best;
}

PLConvexFunction PLConvexFunction::with_heights(std::vector<double> heights) const {
  return PLConvexFunction(sites_, std::move(heights));
}

PLConvexFunction lower_envelope(std::vector<Vec2> sites, std::vector<double> heights) {
  return PLConvexFunction(std::move(sites), std::move(heights));
}

SubgradientCell subgradient_cell(const PLConvexFunction& f, std::size_t site) {
  SubgradientCell cell;
  cell.site = static_cast<int>(site);
  if (!f.active(site) || f.on_hull(site)) return cell;
  for (int face : f.ring(site)) cell.polygon.push_back(f.face_gradients()[face]);
  cell.area = std::max(0.0, signed_area(cell.polygon));
  return cell;
}

std::vector<SubgradientCell> subgradient_cells(const PLConvexFunction& f) {
  std::vector<SubgradientCell> cells;
  for (int i : f.interior_sites()) cells.push_back(subgradient_cell(f, i));
  return cells;
}

MAMeasure ma_measure(const PLConvexFunction& f) {
  MAMeasure m;
  m.masses.assign(f.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.on_hull(i) || !f.active(i)) continue;
    m.masses[i] = subgradient_cell(f, i).area;
    m.total += m.masses[i];
  }
  return m;
}

double ma_mass(const std::vector<SubgradientCell>& cells, const std::vector<int>& sites) {
  std::vector<int> sorted(sites);
  std::sort(sorted.begin(), sorted.end());
  double s = 0.0;
  for (const SubgradientCell& c : cells)
    if (std::binary_search(sorted.begin(), sorted.end(), c.site)) s += c.area;
  return s;
}

std::vector<double> weighted_mass(const std::vector<SubgradientCell>& cells,
                                  const GradientWeight& w, int order) {
  std::vector<double> out(cells.size(), 0.0);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (cells[k].polygon.size() < 3 || cells[k].area == 0.0) continue;
    out[k] = integrate_polygon(w, cells[k].polygon, order);
  }
  return out;
}

double gauss_map_mass(const std::vector<SubgradientCell>& cells, int order) {
  const auto per = weighted_mass(
      cells, [](Vec2 y) { return std::pow(1.0 + norm2(y), -1.5); }, order);
  double s = 0.0;
  for (double v : per) s += v;
  return s;
}

TranslatorIdentity check_translator_identity_exponent(const PLConvexFunction& f,
                                                      double exponent,
                                                      const std::vector<int>& sites) {
  TranslatorIdentity r;
  const auto& tris = f.triangles();
  for (int i : sites) {
    if (i < 0 || static_cast<std::size_t>(i) >= f.size())
      fail(ErrorCode::invalid_argument, "site index out of range");
    if (f.on_hull(i) || !f.active(i)) continue;
    r.mass += subgradient_cell(f, i).area;
    for (int face : f.ring(i)) {
      const auto& t = tris[face];
      const double area =
          0.5 * cross(f.sites()[t[1]] - f.sites()[t[0]], f.sites()[t[2]] - f.sites()[t[0]]);
      const Vec2 g = f.face_gradients()[face];
      r.rhs_integral += area / 3.0 * std::pow(1.0 + norm2(g), exponent);
    }
  }
  r.residual = std::abs(r.mass - r.rhs_integral);
  r.relative = r.rhs_integral > 0.0 ? r.residual / r.rhs_integral : (r.residual > 0.0 ? 1.0 : 0.0);
  return r;
}

TranslatorIdentity check_translator_identity(const PLConvexFunction& f, double alpha,
                                             const std::vector<int>& sites) {
  require_alpha(alpha);
  return check_translator_identity_exponent(f, 2.0 - 1.0 / (2.0 * alpha), sites);
}

MassJacobian mass_jacobian(const PLConvexFunction& f) {
  MassJacobian jac;
  const auto& g = f.face_gradients();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.on_hull(i) || !f.active(i)) continue;
    const auto faces = f.ring(i);
    const auto verts = f.ring_vertices(i);
    const std::size_t m = faces.size();
    for (std::size_t k = 0; k < m; ++k) {
      // Edge (i, verts[k]) separates faces k-1 and k.
      const int j = verts[k];
      if (!f.on_hull(j) && j < static_cast<int>(i)) continue;
      const Vec2 gl = g[faces[(k + m - 1) % m]], gr = g[faces[k]];
      const double len = norm(f.sites()[i] - f.sites()[j]);
      jac.edges.push_back({static_cast<int>(i), j});
      jac.weights.push_back(norm(gr - gl) / len);
    }
  }
  return jac;
}

std::string cells_to_csv(const std::vector<SubgradientCell>& cells) {
  std::string out = "# site_index,area,v1x,v1y,v2x,v2y,...\n";
  for (const SubgradientCell& c : cells) {
    out += std::to_string(c.site);
    out += ',';
    out += format_double(c.area);
    for (Vec2 v : c.polygon) {
      out += ',';
      out += format_double(v.x);
      out += ',';
      out += format_double(v.y);
    }
    out += '\n';
  }
  return out;
}

std::vector<SubgradientCell> cells_from_csv(const std::string& text) {
  std::vector<SubgradientCell> cells;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    for (std::string tok; std::getline(ls, tok, ',');) fields.push_back(tok);
    if (fields.size() < 2 || fields.size() % 2 != 0)
      throw MalformedFile("cell row needs site, area and vertex pairs", lineno);
    SubgradientCell c;
    try {
      c.site = std::stoi(fields[0]);
      c.area = std::stod(fields[1]);
      for (std::size_t k = 2; k < fields.size(); k += 2)
        c.polygon.push_back({std::stod(fields[k]), std::stod(fields[k + 1])});
    } catch (const std::exception&) {
      throw MalformedFile("bad number in cell row", lineno);
    }
    cells.push_back(std::move(c));
  }
  return cells;
}

}  // namespace tma
