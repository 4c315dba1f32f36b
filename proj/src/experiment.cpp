#include "tma/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "tma/analysis.hpp"
#include "tma/error.hpp"
#include "tma/oracle.hpp"
#include "tma/sections.hpp"

namespace tma {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::vector<std::string> kExperiments = {"oracle",  "solve",    "sections",    "growth",
                                               "cascade", "doubling", "verify-dual", "verify-translator"};

std::vector<std::string> sources_for(const std::string& experiment) {
  if (experiment == "growth") return {"oracle-dual", "oracle-primal", "quadratic"};
  if (experiment == "sections") return {"quadratic", "oracle-dual", "separable", "solve-dual"};
  if (experiment == "cascade") return {"separable", "oracle-dual", "solve-dual"};
  if (experiment == "solve") return {"quadratic", "oracle-dual"};
  return {};
}

std::string default_source(const std::string& experiment) {
  const auto s = sources_for(experiment);
  return s.empty() ? "" : s.front();
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
  return out;
}

// Integral and >= 0, whether the JSON value is stored signed or unsigned.
bool is_nonnegative_integer(const json& j) {
  return j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0);
}

struct Checker {
  std::vector<std::string> out;
  void add(const std::string& ptr, const std::string& msg) { out.push_back(ptr + ": " + msg); }

  bool number(const json& j, const std::string& ptr) {
    if (!j.is_number()) {
      add(ptr, "must be a number");
      return false;
    }
    if (!std::isfinite(j.get<double>())) {
      add(ptr, "must be finite");
      return false;
    }
    return true;
  }
  void positive(const json& j, const std::string& ptr, const std::string& name) {
    if (number(j, ptr) && !(j.get<double>() > 0.0)) add(ptr, name + " must be > 0");
  }
  bool integer(const json& j, const std::string& ptr, long lo, const std::string& name) {
    if (!j.is_number_integer()) {
      add(ptr, "must be an integer");
      return false;
    }
    if (j.get<long long>() < lo) {
      add(ptr, name + " must be >= " + std::to_string(lo));
      return false;
    }
    return true;
  }
  void keys(const json& j, const std::string& ptr, const std::set<std::string>& allowed) {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!allowed.count(it.key())) add(ptr + "/" + it.key(), "unknown property");
  }
};

void check_domain(Checker& c, const json& d) {
  if (!d.is_object()) {
    c.add("/domain", "must be an object");
    return;
  }
  if (!d.contains("kind") || !d["kind"].is_string()) {
    c.add("/domain/kind", "must be one of square, disk, polygon");
    return;
  }
  const std::string kind = d["kind"];
  if (kind == "square") {
    c.keys(d, "/domain", {"kind", "half_width"});
    if (!d.contains("half_width")) c.add("/domain/half_width", "is required for a square");
    else c.positive(d["half_width"], "/domain/half_width", "half_width");
  } else if (kind == "disk") {
    c.keys(d, "/domain", {"kind", "radius"});
    if (!d.contains("radius")) c.add("/domain/radius", "is required for a disk");
    else c.positive(d["radius"], "/domain/radius", "radius");
  } else if (kind == "polygon") {
    c.keys(d, "/domain", {"kind", "vertices"});
    if (!d.contains("vertices") || !d["vertices"].is_array()) {
      c.add("/domain/vertices", "must be an array of [x, y] pairs");
      return;
    }
    const json& vs = d["vertices"];
    std::vector<Vec2> pts;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const std::string ptr = "/domain/vertices/" + std::to_string(i);
      if (!vs[i].is_array() || vs[i].size() != 2 || !vs[i][0].is_number() || !vs[i][1].is_number()) {
        c.add(ptr, "must be an [x, y] pair");
        return;
      }
      pts.push_back({vs[i][0].get<double>(), vs[i][1].get<double>()});
    }
    try {
      (void)Domain2D::polygon(pts);
    } catch (const Error& e) {
      c.add("/domain/vertices", e.what());
    }
  } else {
    c.add("/domain/kind", "must be one of square, disk, polygon");
  }
}

Domain2D domain_from_json(const json& d) {
  const std::string kind = d["kind"];
  if (kind == "square") return Domain2D::square(d["half_width"].get<double>());
  if (kind == "disk") return Domain2D::disk(d["radius"].get<double>());
  std::vector<Vec2> pts;
  for (const auto& v : d["vertices"]) pts.push_back({v[0].get<double>(), v[1].get<double>()});
  return Domain2D::polygon(pts);
}

ordered_json domain_to_json(const Domain2D& d) {
  ordered_json j;
  j["kind"] = d.kind_name();
  if (d.kind() == DomainKind::square) j["half_width"] = d.size();
  else if (d.kind() == DomainKind::disk) j["radius"] = d.size();
  else {
    j["vertices"] = ordered_json::array();
    for (Vec2 v : d.vertices()) j["vertices"].push_back({v.x, v.y});
  }
  return j;
}

#define TMA_TOLERANCE_FIELDS(X)                                                           \
  X(growth) X(solve_error) X(dual_error) X(dual_identity) X(translator) X(k0) X(k0_ratio) \
  X(cascade_slope) X(cascade_flat) X(doubling_exact) X(doubling_stability) X(stability_M) \
  X(stability_C1) X(oracle)

}  // namespace

std::vector<std::string> validate_config(const json& j) {
  Checker c;
  if (!j.is_object()) {
    c.add("", "configuration must be a JSON object");
    return c.out;
  }
  c.keys(j, "", {"experiment", "alpha", "eta", "seed", "output_dir", "domain", "h", "source", "rhs",
                 "rmin", "rmax", "n_circles", "levels", "samples", "solver", "tolerances"});
  std::string experiment;
  if (!j.contains("experiment")) {
    c.add("/experiment", "is required");
  } else if (!j["experiment"].is_string() || !contains(kExperiments, j["experiment"])) {
    c.add("/experiment", "must be one of " + join(kExperiments));
  } else {
    experiment = j["experiment"];
  }
  if (j.contains("alpha") && c.number(j["alpha"], "/alpha")) {
    const double a = j["alpha"];
    if (!(a > 0.0)) c.add("/alpha", "alpha must be > 0");
    if (!(a < 0.25)) c.add("/alpha", "alpha must be < 0.25");
  }
  if (j.contains("eta") && c.number(j["eta"], "/eta")) {
    const double e = j["eta"];
    if (!(e >= 0.0 && e <= 1.0)) c.add("/eta", "eta must lie in [0, 1]");
  }
  if (j.contains("seed")) {
    if (!is_nonnegative_integer(j["seed"])) c.add("/seed", "seed must be a nonnegative integer");
  } else if (experiment == "doubling") {
    c.add("/seed", "seed is required for the doubling experiment");
  }
  if (j.contains("output_dir") && (!j["output_dir"].is_string() || j["output_dir"].get<std::string>().empty()))
    c.add("/output_dir", "must be a nonempty string");
  if (j.contains("domain")) check_domain(c, j["domain"]);
  if (j.contains("h")) c.positive(j["h"], "/h", "h");
  if (j.contains("source")) {
    const auto allowed = sources_for(experiment);
    if (!j["source"].is_string()) c.add("/source", "must be a string");
    else if (!experiment.empty() && !contains(allowed, j["source"]))
      c.add("/source", allowed.empty() ? "experiment " + experiment + " takes no source"
                                       : "must be one of " + join(allowed));
  }
  if (j.contains("rhs")) {
    if (!j["rhs"].is_string() || !contains({"constant", "translator", "degenerate"}, j["rhs"]))
      c.add("/rhs", "must be one of constant, translator, degenerate");
  }
  if (j.contains("rmin")) c.positive(j["rmin"], "/rmin", "rmin");
  if (j.contains("rmax")) c.positive(j["rmax"], "/rmax", "rmax");
  if (j.contains("rmin") && j.contains("rmax") && j["rmin"].is_number() && j["rmax"].is_number() &&
      !(j["rmin"].get<double>() < j["rmax"].get<double>()))
    c.add("/rmax", "rmax must exceed rmin");
  if (j.contains("n_circles")) c.integer(j["n_circles"], "/n_circles", 4, "n_circles");
  if (j.contains("levels")) {
    const json& l = j["levels"];
    if (!l.is_object()) {
      c.add("/levels", "must be an object");
    } else {
      c.keys(l, "/levels", {"first", "count", "ratio"});
      if (l.contains("first")) c.positive(l["first"], "/levels/first", "first");
      if (l.contains("count")) c.integer(l["count"], "/levels/count", 2, "count");
      if (l.contains("ratio") && c.number(l["ratio"], "/levels/ratio") && !(l["ratio"].get<double>() > 1.0))
        c.add("/levels/ratio", "ratio must be > 1");
    }
  }
  if (j.contains("samples")) {
    const json& s = j["samples"];
    if (!s.is_array() || s.empty()) {
      c.add("/samples", "must be a nonempty array of positive integers");
    } else {
      for (std::size_t i = 0; i < s.size(); ++i)
        if (!is_nonnegative_integer(s[i]) || s[i].get<std::uint64_t>() == 0)
          c.add("/samples/" + std::to_string(i), "must be a positive integer");
    }
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    if (!s.is_object()) {
      c.add("/solver", "must be an object");
    } else {
      c.keys(s, "/solver", {"tol", "max_iters", "scheme"});
      if (s.contains("tol")) c.positive(s["tol"], "/solver/tol", "tol");
      if (s.contains("max_iters")) c.integer(s["max_iters"], "/solver/max_iters", 1, "max_iters");
      if (s.contains("scheme") && (!s["scheme"].is_string() || !contains({"newton", "oliker-prussner"}, s["scheme"])))
        c.add("/solver/scheme", "must be one of newton, oliker-prussner");
    }
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (!t.is_object()) {
      c.add("/tolerances", "must be an object");
    } else {
      std::set<std::string> names;
#define X(name) names.insert(#name);
      TMA_TOLERANCE_FIELDS(X)
#undef X
      c.keys(t, "/tolerances", names);
      for (auto it = t.begin(); it != t.end(); ++it)
        if (names.count(it.key())) c.positive(it.value(), "/tolerances/" + it.key(), it.key());
    }
  }
  return c.out;
}

std::vector<std::string> validate_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    return {std::string(": invalid JSON: ") + e.what()};
  }
  return validate_config(j);
}

ExperimentConfig parse_config(const json& j) {
  const auto violations = validate_config(j);
  if (!violations.empty()) {
    std::string msg = "invalid configuration";
    for (const auto& v : violations) msg += "; " + v;
    fail(ErrorCode::config_invalid, msg);
  }
  ExperimentConfig c;
  c.experiment = j["experiment"];
  c.alpha = j.value("alpha", c.alpha);
  c.eta = j.value("eta", c.eta);
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  c.output_dir = j.value("output_dir", c.output_dir);
  if (j.contains("domain")) c.domain = domain_from_json(j["domain"]);
  if (j.contains("h")) c.h = j["h"].get<double>();
  c.source = j.value("source", default_source(c.experiment));
  c.rhs = j.value("rhs", std::string());
  c.rmin = j.value("rmin", c.rmin);
  c.rmax = j.value("rmax", c.rmax);
  c.n_circles = j.value("n_circles", c.n_circles);
  if (j.contains("levels")) {
    c.level_first = j["levels"].value("first", c.level_first);
    c.level_count = j["levels"].value("count", c.level_count);
    c.level_ratio = j["levels"].value("ratio", c.level_ratio);
  }
  if (j.contains("samples")) c.samples = j["samples"].get<std::vector<std::uint64_t>>();
  if (j.contains("solver")) {
    const json& s = j["solver"];
    c.solver.tol = s.value("tol", c.solver.tol);
    c.solver.max_iters = s.value("max_iters", c.solver.max_iters);
    if (s.value("scheme", std::string("newton")) == "oliker-prussner")
      c.solver.scheme = SolverScheme::oliker_prussner;
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
#define X(name) c.tol.name = t.value(#name, c.tol.name);
    TMA_TOLERANCE_FIELDS(X)
#undef X
  }
  return c;
}

ordered_json config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["experiment"] = c.experiment;
  j["alpha"] = c.alpha;
  j["eta"] = c.eta;
  if (c.seed) j["seed"] = *c.seed;
  j["output_dir"] = c.output_dir;
  if (c.domain) j["domain"] = domain_to_json(*c.domain);
  if (c.h) j["h"] = *c.h;
  if (!c.source.empty()) j["source"] = c.source;
  if (!c.rhs.empty()) j["rhs"] = c.rhs;
  j["rmin"] = c.rmin;
  j["rmax"] = c.rmax;
  j["n_circles"] = c.n_circles;
  j["levels"] = {{"first", c.level_first}, {"count", c.level_count}, {"ratio", c.level_ratio}};
  j["samples"] = c.samples;
  j["solver"] = {{"tol", c.solver.tol},
                 {"max_iters", c.solver.max_iters},
                 {"scheme", c.solver.scheme == SolverScheme::oliker_prussner ? "oliker-prussner" : "newton"}};
  ordered_json t;
#define X(name) t[#name] = c.tol.name;
  TMA_TOLERANCE_FIELDS(X)
#undef X
  j["tolerances"] = t;
  return j;
}

bool ExperimentReport::pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

std::string table_to_csv(const Table& t) {
  std::string out = "#";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : " ") + t.columns[i];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_double(row[i]);
    out += "\n";
  }
  return out;
}

std::string table_to_dat(const Table& t) {
  std::string out = "#";
  for (const auto& c : t.columns) out += " " + c;
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? " " : "") + format_double(row[i]);
    out += "\n";
  }
  return out;
}

Table table_from_csv(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (lineno != 1) throw MalformedFile("comment after the header", lineno);
      std::istringstream hs(line.substr(1));
      std::string col;
      while (std::getline(hs, col, ',')) {
        const auto b = col.find_first_not_of(' ');
        t.columns.push_back(b == std::string::npos ? "" : col.substr(b));
      }
      continue;
    }
    if (t.columns.empty()) throw MalformedFile("missing header", lineno);
    std::vector<double> row;
    std::istringstream rs(line);
    std::string cell;
    while (std::getline(rs, cell, ',')) {
      // strtod rather than stod: subnormals are valid data, not range errors.
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || cell.empty() || std::isspace(static_cast<unsigned char>(cell[0])))
        throw MalformedFile("not a number: '" + cell + "'", lineno);
      if (*end != '\0') throw MalformedFile("trailing characters in '" + cell + "'", lineno);
      row.push_back(v);
    }
    if (row.size() != t.columns.size()) throw MalformedFile("wrong number of fields", lineno);
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw MalformedFile("empty table", 1);
  return t;
}

namespace {

using Clock = std::chrono::steady_clock;

class Run {
 public:
  explicit Run(const ExperimentConfig& c) : cfg(c) {
    rep.report["experiment"] = c.experiment;
    rep.report["config"] = config_to_json(c);
    rep.report["outputs"] = ordered_json::object();
  }

  void verdict(const std::string& name, double measured, double expected, double tol,
               const std::string& comparison) {
    Verdict v{name, measured, expected, tol, comparison, false};
    if (comparison == "abs") v.pass = std::abs(measured - expected) <= tol;
    else if (comparison == "rel") v.pass = std::abs(measured - expected) <= tol * std::abs(expected);
    else v.pass = measured <= tol;  // "max": measured must not exceed the tolerance
    if (!std::isfinite(measured)) v.pass = false;
    rep.verdicts.push_back(v);
  }

  void table(const std::string& name, const Table& t) {
    write(name + ".csv", table_to_csv(t));
    write(name + ".dat", table_to_dat(t));
  }

  void write(const std::string& name, const std::string& content) {
    write_file_atomic((std::filesystem::path(cfg.output_dir) / name).string(), content);
    rep.files.push_back(name);
  }

  template <class F>
  auto timed(const std::string& phase, F&& f) {
    const auto t0 = Clock::now();
    auto result = f();
    rep.timings[phase] = std::chrono::duration<double>(Clock::now() - t0).count();
    return result;
  }

  ordered_json& outputs() { return rep.report["outputs"]; }

  ExperimentReport finish() {
    ordered_json vs = ordered_json::array();
    for (const auto& v : rep.verdicts)
      vs.push_back({{"name", v.name},
                    {"measured", v.measured},
                    {"expected", v.expected},
                    {"tolerance", v.tolerance},
                    {"comparison", v.comparison},
                    {"pass", v.pass}});
    rep.report["verdicts"] = vs;
    rep.report["pass"] = rep.pass();
    std::vector<std::string> files = rep.files;
    files.push_back("report.json");
    rep.report["files"] = files;
    write("report.json", rep.report.dump(2) + "\n");
    ordered_json timings;
    timings["experiment"] = cfg.experiment;
    timings["seconds"] = rep.timings;
    write("timings.json", timings.dump(2) + "\n");
    return rep;
  }

  const ExperimentConfig& cfg;
  ExperimentReport rep;
};

Field source_field(const ExperimentConfig& c) {
  const double a = c.alpha, eta = c.eta;
  if (c.source == "oracle-dual") return [a, eta](Vec2 x) { return radial_dual_value(a, norm(x), eta); };
  if (c.source == "oracle-primal") return [a](Vec2 x) { return radial_primal_value(a, norm(x)); };
  if (c.source == "separable") {
    const SeparableSolution s = SeparableSolution::make(a);
    return [s](Vec2 x) { return s(x); };
  }
  return [](Vec2 x) { return 0.5 * norm2(x); };
}

RhsField source_rhs(const ExperimentConfig& c) {
  if (c.source == "oracle-dual" || c.source == "solve-dual") return RhsField::dual_translator(c.alpha, c.eta);
  if (c.source == "separable") return RhsField::degenerate(c.alpha);
  return RhsField::constant(1.0);
}

// Radius where a radial profile reaches t.
double level_radius(const std::function<double(double)>& value, double t) {
  double lo = 0.0, hi = 1.0;
  while (value(hi) < t) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) fail(ErrorCode::domain_too_small, "level is never reached");
  }
  for (int k = 0; k < 80; ++k) {
    const double mid = 0.5 * (lo + hi);
    (value(mid) < t ? lo : hi) = mid;
  }
  return hi;
}

// Per-level grid: a square 1.5 times the level radius for radial sources, a
// rectangle 1.5 times the semi-axes for the separable model.
LevelGrid level_grid(const ExperimentConfig& c, int points) {
  if (c.source == "separable") {
    const SeparableSolution s = SeparableSolution::make(c.alpha);
    return [s, points](double t) {
      const Vec2 ax = s.section_semi_axes(t);
      const double wx = 1.5 * ax.x, wy = 1.5 * ax.y;
      return std::pair{Domain2D::polygon({{-wx, -wy}, {wx, -wy}, {wx, wy}, {-wx, wy}}),
                       std::min(ax.x, ax.y) / points};
    };
  }
  const Field f = source_field(c);
  return [f, points](double t) {
    const double r = level_radius([&](double s) { return f({s, 0.0}); }, t);
    return std::pair{Domain2D::square(1.5 * r), r / points};
  };
}

struct DualSolve {
  DirichletProblem problem;
  SolveReport report;
};

DualSolve solve_dual(Run& run) {
  const ExperimentConfig& c = run.cfg;
  const Domain2D domain = c.domain.value_or(Domain2D::disk(8.0));
  const double h = c.h.value_or(0.125);
  const double a = c.alpha, eta = c.eta;
  DirichletProblem p = run.timed("setup", [&] {
    return make_dirichlet_problem(domain, h, RhsField::dual_translator(a, eta),
                                  [a, eta](Vec2 x) { return radial_dual_value(a, norm(x), eta); });
  });
  SolveReport r = run.timed("solve", [&] { return solve(p, c.solver); });
  return {std::move(p), std::move(r)};
}

ordered_json solve_json(const SolveReport& r) { return ordered_json::parse(r.to_json()); }

Table solution_table(const DirichletProblem& p, const SolveReport& r, const std::vector<double>& reference) {
  const MAMeasure m = ma_measure(r.solution);
  Table t{{"x", "y", "value", "reference", "mass", "target", "boundary"}, {}};
  for (std::size_t i = 0; i < p.sites.size(); ++i)
    t.rows.push_back({p.sites[i].x, p.sites[i].y, r.solution.heights()[i], reference[i], m.masses[i],
                      p.targets[i], p.boundary[i] ? 1.0 : 0.0});
  return t;
}

void run_oracle(Run& run) {
  const ExperimentConfig& c = run.cfg;
  const double a = c.alpha, eta = c.eta;
  Table t{{"r", "primal_slope", "primal_value", "dual_slope", "dual_value"}, {}};
  double worst_first = 0.0, worst_value = 0.0;
  const RadialProfile primal(ProfileKind::primal_translator, a);
  const RadialProfile dual(ProfileKind::dual_translator, a, eta);
  for (double r = 1.0 / 16; r <= c.rmax * (1 + 1e-12); r *= std::sqrt(2.0)) {
    t.rows.push_back({r, primal.slope(r), primal.value(r), dual.slope(r), dual.value(r)});
    for (const RadialProfile* prof : {&primal, &dual}) {
      const double d = 1e-4 * r;
      // (s^2 / 2)' / r against the right-hand side
      const double sp = prof->slope(r + d), sm = prof->slope(r - d);
      const double lhs = (sp * sp - sm * sm) / (4.0 * d * r);
      worst_first = std::max(worst_first, std::abs(lhs / prof->rhs(r) - 1.0));
      const double dv = (prof->value(r + d) - prof->value(r - d)) / (2.0 * d);
      worst_value = std::max(worst_value, std::abs(dv / prof->slope(r) - 1.0));
    }
  }
  run.table("oracle", t);
  run.outputs()["alpha"] = a;
  run.outputs()["eta"] = eta;
  run.outputs()["radii"] = t.rows.size();
  run.verdict("first_integral_residual", worst_first, 0.0, c.tol.oracle, "max");
  run.verdict("value_slope_consistency", worst_value, 0.0, c.tol.oracle, "max");
}

void run_growth(Run& run) {
  const ExperimentConfig& c = run.cfg;
  GrowthOptions opt;
  if (c.source == "oracle-dual") opt.slope_theory = 1.0 / (2.0 * c.alpha);
  else if (c.source == "oracle-primal") opt.slope_theory = 1.0 / (1.0 - 2.0 * c.alpha);
  else opt.slope_theory = 2.0;
  const Field f = source_field(c);
  const GrowthFit fit = run.timed("fit", [&] { return growth_exponent(f, c.rmin, c.rmax, c.n_circles, opt); });
  Table t{{"radius", "min", "max"}, {}};
  for (std::size_t k = 0; k < fit.radii.size(); ++k) t.rows.push_back({fit.radii[k], fit.vmin[k], fit.vmax[k]});
  run.table("growth", t);
  auto& o = run.outputs();
  o["alpha"] = c.alpha;
  o["source"] = c.source;
  o["slope"] = fit.slope;
  o["intercept"] = fit.intercept;
  o["slope_theory"] = fit.slope_theory;
  o["ratio_proxy"] = fit.ratio_proxy;
  o["radii"] = fit.radii;
  run.verdict("growth_slope", fit.slope, fit.slope_theory, c.tol.growth, "rel");
}

void run_solve(Run& run) {
  const ExperimentConfig& c = run.cfg;
  const bool quad = c.source == "quadratic";
  const Domain2D domain = c.domain.value_or(quad ? Domain2D::square(1.0) : Domain2D::disk(2.0));
  const double h = c.h.value_or(0.1);
  RhsField rhs = quad ? RhsField::constant(1.0) : RhsField::dual_translator(c.alpha, c.eta);
  if (c.rhs == "constant") rhs = RhsField::constant(1.0);
  else if (c.rhs == "translator") rhs = RhsField::dual_translator(c.alpha, c.eta);
  else if (c.rhs == "degenerate") rhs = RhsField::degenerate(c.alpha);
  const Field g = source_field(c);
  DirichletProblem p = run.timed("setup", [&] { return make_dirichlet_problem(domain, h, rhs, g); });
  SolveReport r = run.timed("solve", [&] { return solve(p, c.solver); });
  std::vector<double> ref(p.sites.size());
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < p.sites.size(); ++i) {
    ref[i] = g(p.sites[i]);
    err = std::max(err, std::abs(r.solution.heights()[i] - ref[i]));
    scale = std::max(scale, std::abs(ref[i]));
  }
  run.table("solution", solution_table(p, r, ref));
  auto& o = run.outputs();
  o["solve"] = solve_json(r);
  o["sites"] = p.sites.size();
  o["rhs"] = rhs.describe();
  o["max_error"] = err;
  o["relative_error"] = scale > 0.0 ? err / scale : err;
  run.verdict("mass_residual", r.max_residual, 0.0, c.solver.tol, "max");
  // The reference solves the equation only for the matching right-hand side.
  if (quad && rhs.kind() == RhsKind::constant && rhs.constant_value() == 1.0)
    run.verdict("max_nodal_error", err, 0.0, c.tol.solve_error, "max");
  else if (!quad && rhs.kind() == RhsKind::dual_translator)
    run.verdict("relative_nodal_error", err / scale, 0.0, c.tol.dual_error, "max");
}

void run_verify_dual(Run& run) {
  const ExperimentConfig& c = run.cfg;
  DualSolve d = solve_dual(run);
  const auto& sites = d.problem.sites;
  const auto& v = d.report.solution.heights();
  std::vector<double> ref(sites.size());
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    ref[i] = radial_dual_value(c.alpha, norm(sites[i]), c.eta);
    err = std::max(err, std::abs(v[i] - ref[i]));
    scale = std::max(scale, std::abs(ref[i]));
  }
  // Weighted mass identity on annuli [kR/8, (k+1)R/8), k = 1..6.
  const MAMeasure m = ma_measure(d.report.solution);
  const double R = d.problem.domain.extent(), h = d.problem.h;
  const double e = 2.0 - 1.0 / (2.0 * c.alpha);
  Table t{{"r_inner", "r_outer", "weighted_mass", "area", "relative"}, {}};
  double worst = 0.0;
  for (int k = 1; k <= 6; ++k) {
    const double r0 = k * R / 8.0, r1 = (k + 1) * R / 8.0;
    double wm = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < sites.size(); ++i) {
      const double r = norm(sites[i]);
      if (d.problem.boundary[i] || r < r0 || r >= r1) continue;
      wm += std::pow(c.eta + r * r, e) * m.masses[i];
      ++count;
    }
    const double area = static_cast<double>(count) * h * h;
    const double rel = std::abs(wm - area) / area;
    worst = std::max(worst, rel);
    t.rows.push_back({r0, r1, wm, area, rel});
  }
  run.table("annuli", t);
  run.table("solution", solution_table(d.problem, d.report, ref));
  auto& o = run.outputs();
  o["solve"] = solve_json(d.report);
  o["sites"] = sites.size();
  o["relative_error"] = err / scale;
  o["identity_worst"] = worst;
  run.verdict("mass_residual", d.report.max_residual, 0.0, c.solver.tol, "max");
  run.verdict("relative_nodal_error", err / scale, 0.0, c.tol.dual_error, "max");
  run.verdict("weighted_mass_identity", worst, 0.0, c.tol.dual_identity, "max");
}

void run_verify_translator(Run& run) {
  const ExperimentConfig& c = run.cfg;
  const Domain2D domain = c.domain.value_or(Domain2D::disk(2.0));
  const double h = c.h.value_or(0.02);
  const std::vector<Vec2> sites = lattice_nodes(domain, h);
  std::vector<double> hts;
  hts.reserve(sites.size());
  for (Vec2 x : sites) hts.push_back(radial_primal_value(c.alpha, norm(x)));
  const PLConvexFunction f = run.timed("envelope", [&] { return PLConvexFunction(sites, hts); });
  const double R = domain.extent();
  std::vector<int> sub;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const double r = norm(sites[i]);
    if (r >= 0.25 * R && r <= 0.75 * R && f.interior(i)) sub.push_back(static_cast<int>(i));
  }
  const TranslatorIdentity ti = run.timed("identity", [&] { return check_translator_identity(f, c.alpha, sub); });
  const double gm = gauss_map_mass(subgradient_cells(f));
  auto& o = run.outputs();
  o["sites"] = sites.size();
  o["annulus_sites"] = sub.size();
  o["mass"] = ti.mass;
  o["rhs_integral"] = ti.rhs_integral;
  o["relative_residual"] = ti.relative;
  o["gauss_map_mass"] = gm;
  run.verdict("translator_identity", ti.relative, 0.0, c.tol.translator, "max");
  run.verdict("gauss_map_mass", gm, 0.0, 2.0 * std::numbers::pi, "max");
}

struct LevelSection {
  Section section;
  EllipsoidFit fit;
  double mass;
};

std::vector<LevelSection> level_sections(Run& run, const std::vector<double>& levels, int points,
                                         const PLConvexFunction* solved) {
  const ExperimentConfig& c = run.cfg;
  const RhsField rhs = source_rhs(c);
  std::vector<LevelSection> out;
  const LevelGrid grid = solved ? LevelGrid{} : level_grid(c, points);
  const Field f = source_field(c);
  for (double t : levels) {
    Section s = solved ? extract_section(*solved, {0, 0}, {0, 0}, t)
                       : [&] {
                           const auto [dom, h] = grid(t);
                           return extract_section(sample(f, dom, h), {0, 0}, {0, 0}, t);
                         }();
    EllipsoidFit fit = john_ellipsoid(s.polygon);
    const double mass = section_mass(rhs, s.polygon);
    fit.k0 = balance_check(s, fit, caffarelli_radius(t, mass));
    out.push_back({std::move(s), fit, mass});
  }
  return out;
}

Table section_table(const std::vector<double>& levels, const std::vector<LevelSection>& ls) {
  Table t{{"level", "center_x", "center_y", "B11", "B12", "B22", "eccentricity", "k0", "area", "mass"}, {}};
  for (std::size_t k = 0; k < ls.size(); ++k) {
    const auto& f = ls[k].fit;
    t.rows.push_back({levels[k], f.center.x, f.center.y, f.B.a11, f.B.a12, f.B.a22, eccentricity(f), f.k0,
                      signed_area(ls[k].section.polygon), ls[k].mass});
  }
  return t;
}

void write_polygons(Run& run, const std::vector<double>& levels, const std::vector<LevelSection>& ls) {
  std::string dat = "# level x y\n";
  for (std::size_t k = 0; k < ls.size(); ++k) {
    const Polygon& poly = ls[k].section.polygon;
    for (std::size_t i = 0; i <= poly.size(); ++i) {
      const Vec2 v = poly[i % poly.size()];
      dat += format_double(levels[k]) + " " + format_double(v.x) + " " + format_double(v.y) + "\n";
    }
    dat += "\n\n";
  }
  run.write("section_polygons.dat", dat);
}

void run_sections(Run& run) {
  const ExperimentConfig& c = run.cfg;
  const std::vector<double> levels = dyadic_levels(c.level_first, c.level_count, c.level_ratio);
  std::optional<DualSolve> d;
  if (c.source == "solve-dual") d = solve_dual(run);
  const auto ls = run.timed("sections", [&] {
    return level_sections(run, levels, 100, d ? &d->report.solution : nullptr);
  });
  run.table("sections", section_table(levels, ls));
  write_polygons(run, levels, ls);
  double kmin = std::numeric_limits<double>::infinity(), kmax = 0.0, kdev = 0.0;
  const double k_ball = std::sqrt(4.0 * std::numbers::pi);
  std::vector<double> k0s;
  for (const auto& l : ls) {
    kmin = std::min(kmin, l.fit.k0);
    kmax = std::max(kmax, l.fit.k0);
    kdev = std::max(kdev, std::abs(l.fit.k0 - k_ball));
    k0s.push_back(l.fit.k0);
  }
  auto& o = run.outputs();
  o["source"] = c.source;
  o["levels"] = levels;
  o["k0"] = k0s;
  if (d) o["solve"] = solve_json(d->report);
  if (c.source == "quadratic") run.verdict("k0_deviation", kdev, 0.0, c.tol.k0, "max");
  else run.verdict("k0_ratio", kmax / kmin, 0.0, c.tol.k0_ratio, "max");
}

void run_cascade(Run& run) {
  const ExperimentConfig& c = run.cfg;
  const std::vector<double> levels = dyadic_levels(c.level_first, c.level_count, c.level_ratio);
  std::optional<DualSolve> d;
  if (c.source == "solve-dual") d = solve_dual(run);
  const CascadeSeries s = run.timed("cascade", [&] {
    if (d) return eccentricity_cascade(d->report.solution, {0, 0}, {0, 0}, levels);
    return eccentricity_cascade(source_field(c), {0, 0}, {0, 0}, levels, level_grid(c, 40));
  });
  Table t{{"level", "eccentricity", "area", "B11", "B12", "B22"}, {}};
  for (std::size_t k = 0; k < levels.size(); ++k)
    t.rows.push_back({levels[k], s.eccentricities[k], s.areas[k], s.fits[k].B.a11, s.fits[k].B.a12,
                      s.fits[k].B.a22});
  run.table("cascade", t);
  auto& o = run.outputs();
  o["alpha"] = c.alpha;
  o["source"] = c.source;
  o["slope"] = s.slope;
  o["levels"] = levels;
  o["eccentricities"] = s.eccentricities;
  if (c.source == "separable") {
    const double theory = 0.5 * (0.5 - c.alpha / (1.0 - 2.0 * c.alpha));
    o["slope_theory"] = theory;
    run.verdict("cascade_slope", s.slope, theory, c.tol.cascade_slope, "rel");
  } else if (c.source == "oracle-dual") {
    o["slope_theory"] = 0.0;
    run.verdict("cascade_slope", s.slope, 0.0, c.tol.cascade_flat, "abs");
  } else {
    o["solve"] = solve_json(d->report);
    const StabilityResult st = stability_check(s, c.tol.stability_M, c.tol.stability_C1);
    o["stability"] = {{"holds", st.holds}, {"min_c1", st.min_c1}, {"l_prime", st.l_prime}};
    run.verdict("stability_min_c1", st.min_c1, 0.0, c.tol.stability_C1, "max");
  }
}

void run_doubling(Run& run) {
  const ExperimentConfig& c = run.cfg;
  const std::string rhs_name = c.rhs.empty() ? "constant" : c.rhs;
  RhsField f = RhsField::constant(1.0);
  if (rhs_name == "translator") f = RhsField::dual_translator(c.alpha, c.eta);
  else if (rhs_name == "degenerate") f = RhsField::degenerate(c.alpha);
  const Domain2D region = c.domain.value_or(rhs_name == "constant" ? Domain2D::disk(4.0) : Domain2D::disk(16.0));
  std::vector<double> estimates;
  DoublingEstimate last;
  for (std::uint64_t n : c.samples) {
    last = run.timed("samples_" + std::to_string(n), [&] { return doubling_constant(f, region, n, *c.seed); });
    estimates.push_back(last.estimate);
  }
  Table t{{"sample", "running_max"}, {}};
  for (std::size_t k = 0; k < last.running_max.size(); ++k)
    t.rows.push_back({static_cast<double>(k + 1), last.running_max[k]});
  run.table("doubling", t);
  auto& o = run.outputs();
  o["rhs"] = f.describe();
  o["samples"] = c.samples;
  o["estimates"] = estimates;
  o["rejected"] = last.rejected;
  if (rhs_name == "constant") {
    double worst = 0.0;
    for (double e : estimates) worst = std::max(worst, std::abs(e - 4.0));
    run.verdict("doubling_constant", 4.0 + worst, 4.0, c.tol.doubling_exact, "abs");
  } else {
    const double change = std::abs(estimates.back() / estimates.front() - 1.0);
    run.verdict("doubling_stability", change, 0.0, c.tol.doubling_stability, "max");
  }
}

}  // namespace

ExperimentReport run(const ExperimentConfig& config) {
  if (!contains(kExperiments, config.experiment))
    fail(ErrorCode::config_invalid, "/experiment: unknown experiment " + config.experiment);
  if (config.experiment == "doubling" && !config.seed)
    fail(ErrorCode::config_invalid, "/seed: seed is required for the doubling experiment");
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) fail(ErrorCode::io_error, "cannot create " + config.output_dir + ": " + ec.message());
  Run r(config);
  const auto t0 = Clock::now();
  const std::string& e = config.experiment;
  if (e == "oracle") run_oracle(r);
  else if (e == "growth") run_growth(r);
  else if (e == "solve") run_solve(r);
  else if (e == "sections") run_sections(r);
  else if (e == "cascade") run_cascade(r);
  else if (e == "doubling") run_doubling(r);
  else if (e == "verify-dual") run_verify_dual(r);
  else run_verify_translator(r);
  r.rep.timings["total"] = std::chrono::duration<double>(Clock::now() - t0).count();
  return r.finish();
}

}  // namespace tma
