#include "tma/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

#include "tma/error.hpp"
#include "tma/predicates.hpp"

namespace tma {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon() / 2;

void require_not_collinear(const GridFunction& u) {
  const auto& x = u.nodes();
  std::size_t b = 1;
  while (b < x.size() && x[b] == x[0]) ++b;
  for (std::size_t c = b + 1; c < x.size(); ++c)
    if (orient2d(x[0], x[b], x[c]) != 0) return;
  fail(ErrorCode::degenerate_input, "primal nodes are collinear");
}

// Sign of the orientation of (X_a, H_a), (X_b, H_b), (X_c, H_c) with
// X = x2 and H = u - y1 * x1 for primal nodes a, b, c.
int outer_orient(const GridFunction& u, double y1, std::size_t a, std::size_t b, std::size_t c) {
  const Vec2 pa = u.node(a), pb = u.node(b), pc = u.node(c);
  const double ua = u.value(a), ub = u.value(b), uc = u.value(c);
  const double ha = ua - y1 * pa.x, hb = ub - y1 * pb.x, hc = uc - y1 * pc.x;
  const double ea = 2 * kEps * (std::abs(y1 * pa.x) + std::abs(ua));
  const double eb = 2 * kEps * (std::abs(y1 * pb.x) + std::abs(ub));
  const double ec = 2 * kEps * (std::abs(y1 * pc.x) + std::abs(uc));
  const double dxb = pb.y - pa.y, dxc = pc.y - pa.y;
  const double dhb = hb - ha, dhc = hc - ha;
  const double l = dxb * dhc, r = dxc * dhb;
  const double det = l - r;
  const double bound = 2.0 * (std::abs(dxb) * (ea + ec + kEps * std::abs(dhc)) +
                              std::abs(dxc) * (ea + eb + kEps * std::abs(dhb)) +
                              4 * kEps * (std::abs(l) + std::abs(r)));
  if (det > bound) return 1;
  if (-det > bound) return -1;
  auto H = [&](Vec2 p, double v) { return Expansion(v) - Expansion::product(y1, p.x); };
  const Expansion Ha = H(pa, ua), Hb = H(pb, ub), Hc = H(pc, uc);
  const Expansion Xb = Expansion::difference(pb.y, pa.y);
  const Expansion Xc = Expansion::difference(pc.y, pa.y);
  return (Xb * (Hc - Ha) - Xc * (Hb - Ha)).sign();
}

std::vector<std::size_t> brute_force(const GridFunction& u, const std::vector<Vec2>& ys) {
  std::vector<std::size_t> arg(ys.size(), 0);
  const std::size_t n = u.size();
  for (std::size_t d = 0; d < ys.size(); ++d) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < n; ++k)
      if (compare_affine(ys[d], u.node(k), u.value(k), u.node(best), u.value(best)) > 0) best = k;
    arg[d] = best;
  }
  return arg;
}

std::vector<std::size_t> separable(const GridFunction& u, const std::vector<Vec2>& ys, double h_dual) {
  // Dual columns: nodes sharing y1, in increasing y2 (node order is by (y2, y1)).
  std::map<long, std::vector<std::size_t>> by_column;
  for (std::size_t d = 0; d < ys.size(); ++d)
    by_column[std::lround(ys[d].x / h_dual)].push_back(d);
  std::vector<double> col_y1;
  std::vector<const std::vector<std::size_t>*> col_nodes;
  for (const auto& [i, nodes] : by_column) {
    col_y1.push_back(ys[nodes.front()].x);
    col_nodes.push_back(&nodes);
  }
  const std::size_t ncol = col_y1.size();
  const auto& rows = u.rows();
  const std::size_t nrow = rows.size();

  // Row step: per primal row, the exact maximiser of y1 x1 - u for every column.
  std::vector<std::size_t> row_arg(nrow * ncol);
  std::vector<std::size_t> hull;
  for (std::size_t r = 0; r < nrow; ++r) {
    const auto& row = rows[r];
    hull.clear();
    for (std::size_t k = row.first; k < row.first + row.count; ++k) {
      const Vec2 pk{u.node(k).x, u.value(k)};
      while (hull.size() >= 2) {
        const std::size_t a = hull[hull.size() - 2], b = hull.back();
        if (orient2d({u.node(a).x, u.value(a)}, {u.node(b).x, u.value(b)}, pk) >= 0) break;
        hull.pop_back();
      }
      hull.push_back(k);
    }
    std::size_t p = 0;
    for (std::size_t c = 0; c < ncol; ++c) {
      const Vec2 y{col_y1[c], 0.0};
      while (p + 1 < hull.size()) {
        const std::size_t a = hull[p], b = hull[p + 1];
        if (compare_affine(y, {u.node(b).x, 0.0}, u.value(b), {u.node(a).x, 0.0}, u.value(a)) <= 0)
          break;
        ++p;
      }
      row_arg[r * ncol + c] = hull[p];
    }
  }

  // Column step: maximise y2 x2 + (y1 x1 - u) over the row maximisers.
  std::vector<std::size_t> arg(ys.size(), 0);
  std::vector<std::size_t> cand(nrow);
  for (std::size_t c = 0; c < ncol; ++c) {
    const double y1 = col_y1[c];
    hull.clear();
    for (std::size_t r = 0; r < nrow; ++r) {
      const std::size_t k = row_arg[r * ncol + c];
      while (hull.size() >= 2 && outer_orient(u, y1, hull[hull.size() - 2], hull.back(), k) < 0)
        hull.pop_back();
      hull.push_back(k);
    }
    std::size_t p = 0;
    for (std::size_t d : *col_nodes[c]) {
      const Vec2 y = ys[d];
      while (p + 1 < hull.size()) {
        const std::size_t a = hull[p], b = hull[p + 1];
        if (compare_affine(y, u.node(b), u.value(b), u.node(a), u.value(a)) <= 0) break;
        ++p;
      }
      arg[d] = hull[p];
    }
  }
  return arg;
}

}  // namespace

ConjugateResult legendre_transform(const GridFunction& u, const Domain2D& dual_domain,
                                   double h_dual, ConjugateMethod method) {
  if (!(h_dual > 0.0)) fail(ErrorCode::invalid_argument, "dual spacing must be positive");
  if (u.size() < 3) fail(ErrorCode::degenerate_input, "need at least 3 primal nodes");
  require_not_collinear(u);
  std::vector<Vec2> ys = lattice_nodes(dual_domain, h_dual);
  if (ys.empty()) fail(ErrorCode::empty_domain, "no dual lattice node in the dual domain");
  std::vector<std::size_t> arg =
      method == ConjugateMethod::brute_force ? brute_force(u, ys) : separable(u, ys, h_dual);
  std::vector<double> vals(ys.size());
  for (std::size_t d = 0; d < ys.size(); ++d)
    vals[d] = conjugate_candidate(ys[d], u.node(arg[d]), u.value(arg[d]));
  return {GridFunction(dual_domain, h_dual, std::move(ys), std::move(vals)), std::move(arg)};
}

Domain2D default_dual_domain(const GridFunction& u, double h_dual) {
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const auto [i, j] = u.lattice_index(k);
    for (const auto& [di, dj] : {std::pair{1, 0}, std::pair{0, 1}}) {
      const long m = u.index_of(i + di, j + dj);
      if (m >= 0) s = std::max(s, std::abs(u.value(m) - u.value(k)) / u.h());
    }
  }
  return Domain2D::square(s + h_dual);
}

namespace {

// Exact value <x, y> - <y, x_a> + u_a of the affine minorant with slope y
// that touches u at node x_a.
Expansion minorant_at(Vec2 x, Vec2 y, Vec2 xa, double ua) {
  return Expansion::product(y.x, x.x) + Expansion::product(y.y, x.y) -
         Expansion::product(y.x, xa.x) - Expansion::product(y.y, xa.y) + Expansion(ua);
}

// Smallest double >= e.
double round_up(const Expansion& e) {
  double d = e.estimate();
  while ((Expansion(d) - e).sign() < 0) d = std::nextafter(d, std::numeric_limits<double>::infinity());
  for (;;) {
    const double lower = std::nextafter(d, -std::numeric_limits<double>::infinity());
    if ((Expansion(lower) - e).sign() < 0) break;
    d = lower;
  }
  return d;
}

}  // namespace

GridFunction biconjugate(const GridFunction& u, double h_dual, ConjugateMethod method) {
  const ConjugateResult star = legendre_transform(u, default_dual_domain(u, h_dual), h_dual, method);
  const GridFunction& ud = star.dual;
  const std::size_t m = ud.size();
  // Rounding bound of each floating candidate against its exact value.
  std::vector<double> size(m);
  for (std::size_t d = 0; d < m; ++d) {
    const Vec2 y = ud.node(d), xa = u.node(star.argmax[d]);
    size[d] = std::abs(y.x * xa.x) + std::abs(y.y * xa.y) + std::abs(u.value(star.argmax[d]));
  }
  constexpr double kBound = 8.0 * std::numeric_limits<double>::epsilon();

  // The envelope value is the exact maximum over the dual nodes. Nodes where
  // it equals u keep their value; elsewhere it is rounded up, so that a
  // second pass sees the same dual and reproduces every value.
  std::vector<double> out(u.size());
  std::vector<double> f(m), b(m);
  for (std::size_t k = 0; k < u.size(); ++k) {
    const Vec2 x = u.node(k);
    double floor_max = -std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < m; ++d) {
      const Vec2 y = ud.node(d);
      f[d] = conjugate_candidate(x, y, ud.value(d));
      b[d] = kBound * (std::abs(y.x * x.x) + std::abs(y.y * x.y) + size[d]) + 1e-300;
      floor_max = std::max(floor_max, f[d] - b[d]);
    }
    std::optional<Expansion> best;
    for (std::size_t d = 0; d < m; ++d) {
      if (f[d] + b[d] < floor_max) continue;
      const std::size_t a = star.argmax[d];
      Expansion v = minorant_at(x, ud.node(d), u.node(a), u.value(a));
      if (!best || (v - *best).sign() > 0) best = std::move(v);
    }
    const Expansion gap = Expansion(u.value(k)) - *best;
    out[k] = gap.sign() <= 0 ? u.value(k) : round_up(*best);
  }
  return u.with_values(std::move(out));
}

}  // namespace tma
