#include "tma/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "tma/error.hpp"
#include "tma/predicates.hpp"

namespace tma {

Domain2D Domain2D::square(double half_width) {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    fail(ErrorCode::invalid_argument, "square half-width must be positive");
  Domain2D d;
  d.kind_ = DomainKind::square;
  d.size_ = half_width;
  const double w = half_width;
  d.vertices_ = {{-w, -w}, {w, -w}, {w, w}, {-w, w}};
  return d;
}

Domain2D Domain2D::disk(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    fail(ErrorCode::invalid_argument, "disk radius must be positive");
  Domain2D d;
  d.kind_ = DomainKind::disk;
  d.size_ = radius;
  return d;
}

Domain2D Domain2D::polygon(std::vector<Vec2> vertices) {
  const std::size_t n = vertices.size();
  if (n < 3) fail(ErrorCode::invalid_argument, "polygon needs at least 3 vertices");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(vertices[i].x) || !std::isfinite(vertices[i].y))
      fail(ErrorCode::nonfinite_value, "polygon vertex is not finite");
    if (orient2d(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]) <= 0)
      fail(ErrorCode::invalid_argument,
           "polygon vertices must be counterclockwise and strictly convex");
  }
  // Strict convexity of every corner plus a total turn of one revolution.
  double turn = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e0 = vertices[(i + 1) % n] - vertices[i];
    const Vec2 e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
    turn += std::atan2(cross(e0, e1), dot(e0, e1));
  }
  if (std::abs(turn - 2.0 * std::numbers::pi) > 1e-6)
    fail(ErrorCode::invalid_argument, "polygon is not simple");
  Domain2D d;
  d.kind_ = DomainKind::polygon;
  d.vertices_ = std::move(vertices);
  d.size_ = d.extent();
  return d;
}

bool Domain2D::contains(Vec2 p, double tol) const {
  switch (kind_) {
    case DomainKind::square:
      return std::abs(p.x) <= size_ + tol && std::abs(p.y) <= size_ + tol;
    case DomainKind::disk:
      return norm(p) <= size_ + tol;
    case DomainKind::polygon:
      return convex_contains(vertices_, p, tol);
  }
  return false;
}

double Domain2D::boundary_distance(Vec2 p) const {
  if (!contains(p)) return 0.0;
  switch (kind_) {
    case DomainKind::square:
      return std::min(size_ - std::abs(p.x), size_ - std::abs(p.y));
    case DomainKind::disk:
      return size_ - norm(p);
    case DomainKind::polygon: {
      double d = std::numeric_limits<double>::infinity();
      const std::size_t n = vertices_.size();
      for (std::size_t i = 0; i < n; ++i)
        d = std::min(d, segment_distance(p, vertices_[i], vertices_[(i + 1) % n]));
      return d;
    }
  }
  return 0.0;
}

double Domain2D::extent() const {
  if (kind_ != DomainKind::polygon) return size_;
  double e = 0.0;
  for (Vec2 v : vertices_) e = std::max({e, std::abs(v.x), std::abs(v.y)});
  return e;
}

double Domain2D::diameter() const {
  switch (kind_) {
    case DomainKind::square: return 2.0 * std::sqrt(2.0) * size_;
    case DomainKind::disk: return 2.0 * size_;
    case DomainKind::polygon: {
      double d = 0.0;
      for (Vec2 a : vertices_)
        for (Vec2 b : vertices_) d = std::max(d, norm(a - b));
      return d;
    }
  }
  return 0.0;
}

double Domain2D::area() const {
  switch (kind_) {
    case DomainKind::square: return 4.0 * size_ * size_;
    case DomainKind::disk: return std::numbers::pi * size_ * size_;
    case DomainKind::polygon: return signed_area(vertices_);
  }
  return 0.0;
}

std::string Domain2D::kind_name() const {
  switch (kind_) {
    case DomainKind::square: return "square";
    case DomainKind::disk: return "disk";
    case DomainKind::polygon: return "polygon";
  }
  return "unknown";
}

namespace {

double lattice_tol(const Domain2D& domain) {
  return 1e-12 * std::max(1.0, domain.extent());
}

}  // namespace

std::vector<Vec2> lattice_nodes(const Domain2D& domain, double h) {
  if (!(h > 0.0) || !std::isfinite(h))
    fail(ErrorCode::invalid_argument, "spacing h must be positive");
  const double e = domain.extent();
  const double tol = lattice_tol(domain);
  const long imax = static_cast<long>(std::floor(e / h + 1e-9));
  if (imax > 100000) fail(ErrorCode::invalid_argument, "lattice too large");
  std::vector<Vec2> nodes;
  for (long j = -imax; j <= imax; ++j) {
    for (long i = -imax; i <= imax; ++i) {
      const Vec2 p{static_cast<double>(i) * h, static_cast<double>(j) * h};
      if (domain.contains(p, tol)) nodes.push_back(p);
    }
  }
  return nodes;
}

GridFunction::GridFunction(Domain2D domain, double h, std::vector<Vec2> nodes,
                           std::vector<double> values)
    : domain_(std::move(domain)), h_(h), nodes_(std::move(nodes)),
      values_(std::move(values)) {
  if (!(h_ > 0.0) || !std::isfinite(h_))
    fail(ErrorCode::invalid_argument, "spacing h must be positive");
  if (nodes_.size() != values_.size())
    fail(ErrorCode::invalid_argument, "node and value counts differ");
  if (nodes_.empty()) fail(ErrorCode::empty_domain, "no lattice node in domain");
  ij_.resize(nodes_.size());
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (!std::isfinite(values_[k]))
      fail(ErrorCode::nonfinite_value, "grid value is not finite");
    const Vec2 p = nodes_[k];
    const double fi = std::round(p.x / h_), fj = std::round(p.y / h_);
    if (std::abs(p.x - fi * h_) > 1e-9 * h_ || std::abs(p.y - fj * h_) > 1e-9 * h_)
      fail(ErrorCode::invalid_argument, "node is not on the lattice");
    ij_[k] = {static_cast<int>(fi), static_cast<int>(fj)};
    if (k > 0) {
      const auto [pi, pj] = ij_[k - 1];
      const auto [ci, cj] = ij_[k];
      if (cj < pj || (cj == pj && ci <= pi))
        fail(ErrorCode::invalid_argument, "nodes not in lexicographic order");
      if (cj == pj && ci != pi + 1)
        fail(ErrorCode::invalid_argument, "lattice row has a gap");
    }
    if (rows_.empty() || rows_.back().j != ij_[k][1]) {
      rows_.push_back({ij_[k][1], ij_[k][0], k, 0});
    }
    ++rows_.back().count;
  }
}

long GridFunction::index_of(int i, int j) const {
  if (rows_.empty()) return -1;
  const int j0 = rows_.front().j;
  const long r = static_cast<long>(j) - j0;
  if (r < 0 || r >= static_cast<long>(rows_.size())) return -1;
  const Row& row = rows_[r];
  if (row.j != j) {
    // Rows are contiguous in j for convex domains; fall back to search.
    auto it = std::lower_bound(rows_.begin(), rows_.end(), j,
                               [](const Row& a, int v) { return a.j < v; });
    if (it == rows_.end() || it->j != j) return -1;
    const long off = static_cast<long>(i) - it->i_first;
    if (off < 0 || off >= static_cast<long>(it->count)) return -1;
    return static_cast<long>(it->first) + off;
  }
  const long off = static_cast<long>(i) - row.i_first;
  if (off < 0 || off >= static_cast<long>(row.count)) return -1;
  return static_cast<long>(row.first) + off;
}

std::optional<double> GridFunction::interpolate(Vec2 p) const {
  const double fx = p.x / h_, fy = p.y / h_;
  const int i = static_cast<int>(std::floor(fx));
  const int j = static_cast<int>(std::floor(fy));
  const double s = fx - i, t = fy - j;
  const long k00 = index_of(i, j), k10 = index_of(i + 1, j);
  const long k01 = index_of(i, j + 1), k11 = index_of(i + 1, j + 1);
  auto v = [&](long k, double w) -> std::optional<double> {
    if (w == 0.0) return 0.0;
    if (k < 0) return std::nullopt;
    return w * values_[k];
  };
  const auto a = v(k00, (1 - s) * (1 - t)), b = v(k10, s * (1 - t));
  const auto c = v(k01, (1 - s) * t), d = v(k11, s * t);
  if (!a || !b || !c || !d) return std::nullopt;
  return *a + *b + *c + *d;
}

GridFunction GridFunction::with_values(std::vector<double> values) const {
  return GridFunction(domain_, h_, nodes_, std::move(values));
}

GridFunction sample(const Field& field, const Domain2D& domain, double h) {
  std::vector<Vec2> nodes = lattice_nodes(domain, h);
  if (nodes.empty()) fail(ErrorCode::empty_domain, "no lattice node falls inside the domain");
  std::vector<double> values(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    values[k] = field(nodes[k]);
    if (!std::isfinite(values[k]))
      fail(ErrorCode::nonfinite_value, "field is not finite at node (" +
                                           format_double(nodes[k].x) + ", " +
                                           format_double(nodes[k].y) + ")");
  }
  return GridFunction(domain, h, std::move(nodes), std::move(values));
}

RhsField RhsField::constant(double value) {
  if (!(value > 0.0) || !std::isfinite(value))
    fail(ErrorCode::invalid_argument, "constant rhs must be positive");
  RhsField f;
  f.kind_ = RhsKind::constant;
  f.value_ = value;
  return f;
}

RhsField RhsField::dual_translator(double alpha, double eta) {
  require_alpha(alpha);
  if (!(eta >= 0.0 && eta <= 1.0)) fail(ErrorCode::invalid_argument, "eta must lie in [0, 1]");
  RhsField f;
  f.kind_ = RhsKind::dual_translator;
  f.alpha_ = alpha;
  f.eta_ = eta;
  return f;
}

RhsField RhsField::degenerate(double alpha) {
  require_alpha(alpha);
  RhsField f;
  f.kind_ = RhsKind::degenerate;
  f.alpha_ = alpha;
  return f;
}

RhsField RhsField::custom_radial(std::function<double(double)> profile, std::string label) {
  if (!profile) fail(ErrorCode::invalid_argument, "radial profile is empty");
  RhsField f;
  f.kind_ = RhsKind::custom_radial;
  f.radial_ = std::move(profile);
  f.label_ = std::move(label);
  return f;
}

std::string RhsField::describe() const {
  switch (kind_) {
    case RhsKind::constant: return "constant(" + format_double(value_) + ")";
    case RhsKind::dual_translator:
      return "dual_translator(alpha=" + format_double(alpha_) + ", eta=" + format_double(eta_) + ")";
    case RhsKind::degenerate: return "degenerate(alpha=" + format_double(alpha_) + ")";
    case RhsKind::custom_radial: return label_;
  }
  return "unknown";
}

double RhsField::operator()(Vec2 x) const {
  switch (kind_) {
    case RhsKind::constant: return value_;
    case RhsKind::dual_translator:
      return std::pow(eta_ + norm2(x), 1.0 / (2.0 * alpha_) - 2.0);
    case RhsKind::degenerate:
      return x.x == 0.0 ? 0.0 : std::pow(std::abs(x.x), 1.0 / alpha_ - 4.0);
    case RhsKind::custom_radial: return radial_(norm(x));
  }
  return 0.0;
}

RhsConditionReport check_rhs_condition(const RhsField& f, double alpha, double epsilon,
                                       const std::vector<double>& radii, int n_angles) {
  require_alpha(alpha);
  if (n_angles < 64) fail(ErrorCode::invalid_argument, "need at least 64 angular samples");
  if (radii.empty()) fail(ErrorCode::invalid_argument, "no radii given");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0)) fail(ErrorCode::invalid_argument, "radii must be positive");
    if (k > 0 && !(radii[k] > radii[k - 1]))
      fail(ErrorCode::invalid_argument, "radii must be increasing");
  }
  RhsConditionReport rep;
  rep.radii = radii;
  const double power = 4.0 - 1.0 / alpha;
  for (double r : radii) {
    double worst = 0.0;
    const double scale = std::pow(r, power);
    for (int k = 0; k < n_angles; ++k) {
      const double th = 2.0 * std::numbers::pi * k / n_angles;
      const double v = f({r * std::cos(th), r * std::sin(th)});
      if (!std::isfinite(v)) fail(ErrorCode::nonfinite_value, "rhs is not finite");
      worst = std::max(worst, std::abs(scale * v - 1.0));
    }
    rep.deviation.push_back(worst);
  }
  const std::size_t n = rep.deviation.size();
  rep.eventually_within = true;
  for (std::size_t k = n >= 3 ? n - 3 : 0; k < n; ++k)
    rep.eventually_within = rep.eventually_within && rep.deviation[k] <= epsilon;
  return rep;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string to_gfn_string(const GridFunction& gf) {
  std::string out = "GFN 1\ndomain " + gf.domain().kind_name();
  const Domain2D& d = gf.domain();
  if (d.kind() == DomainKind::polygon) {
    out += " " + std::to_string(d.vertices().size());
    for (Vec2 v : d.vertices()) out += " " + format_double(v.x) + " " + format_double(v.y);
  } else {
    out += " " + format_double(d.size());
  }
  out += "\nh " + format_double(gf.h()) + "\nn " + std::to_string(gf.size()) + "\n";
  for (std::size_t k = 0; k < gf.size(); ++k) {
    out += format_double(gf.node(k).x);
    out += ' ';
    out += format_double(gf.node(k).y);
    out += ' ';
    out += format_double(gf.value(k));
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> tok;
  for (std::string t; is >> t;) tok.push_back(t);
  return tok;
}

double parse_number(const std::string& s, int line) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  if (!s.empty() && *b == '+') ++b;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e)
    throw MalformedFile("not a number: '" + s + "'", line);
  return v;
}

long parse_count(const std::string& s, int line) {
  long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || v < 0)
    throw MalformedFile("not a count: '" + s + "'", line);
  return v;
}

}  // namespace

GridFunction from_gfn_string(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  auto next = [&](const char* what) {
    if (!std::getline(is, line)) throw MalformedFile(std::string("missing ") + what, lineno + 1);
    ++lineno;
    return split_ws(line);
  };

  auto tok = next("header");
  if (tok.size() != 2 || tok[0] != "GFN" || tok[1] != "1")
    throw MalformedFile("expected 'GFN 1'", lineno);

  tok = next("domain line");
  if (tok.size() < 3 || tok[0] != "domain") throw MalformedFile("expected 'domain <kind> <params>'", lineno);
  std::optional<Domain2D> domain;
  try {
    if (tok[1] == "square" && tok.size() == 3) {
      domain = Domain2D::square(parse_number(tok[2], lineno));
    } else if (tok[1] == "disk" && tok.size() == 3) {
      domain = Domain2D::disk(parse_number(tok[2], lineno));
    } else if (tok[1] == "polygon") {
      const long nv = parse_count(tok[2], lineno);
      if (static_cast<long>(tok.size()) != 3 + 2 * nv)
        throw MalformedFile("polygon vertex count does not match", lineno);
      std::vector<Vec2> verts;
      for (long k = 0; k < nv; ++k)
        verts.push_back({parse_number(tok[3 + 2 * k], lineno), parse_number(tok[4 + 2 * k], lineno)});
      domain = Domain2D::polygon(std::move(verts));
    } else {
      throw MalformedFile("unknown domain '" + tok[1] + "'", lineno);
    }
  } catch (const MalformedFile&) {
    throw;
  } catch (const Error& e) {
    throw MalformedFile(e.what(), lineno);
  }

  tok = next("spacing line");
  if (tok.size() != 2 || tok[0] != "h") throw MalformedFile("expected 'h <spacing>'", lineno);
  const double h = parse_number(tok[1], lineno);
  if (!(h > 0.0)) throw MalformedFile("spacing must be positive", lineno);

  tok = next("count line");
  if (tok.size() != 2 || tok[0] != "n") throw MalformedFile("expected 'n <node-count>'", lineno);
  const long n = parse_count(tok[1], lineno);

  std::vector<Vec2> nodes;
  std::vector<double> values;
  nodes.reserve(n);
  values.reserve(n);
  for (long k = 0; k < n; ++k) {
    tok = next("node line");
    if (tok.size() != 3) throw MalformedFile("expected 'x1 x2 value'", lineno);
    nodes.push_back({parse_number(tok[0], lineno), parse_number(tok[1], lineno)});
    values.push_back(parse_number(tok[2], lineno));
  }
  while (std::getline(is, line)) {
    ++lineno;
    if (!split_ws(line).empty())
      throw MalformedFile("more node lines than the declared count " + std::to_string(n), lineno);
  }
  try {
    return GridFunction(*domain, h, std::move(nodes), std::move(values));
  } catch (const Error& e) {
    throw MalformedFile(e.what(), lineno);
  }
}

void save(const GridFunction& gf, const std::string& path) {
  write_file_atomic(path, to_gfn_string(gf));
}

GridFunction load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_gfn_string(ss.str());
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io_error, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) fail(ErrorCode::io_error, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) fail(ErrorCode::io_error, "cannot rename to " + path + ": " + ec.message());
}

}  // namespace tma
