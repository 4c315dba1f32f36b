#include "tma/tma.h"

#include <cstring>
#include <new>
#include <string>

#include "tma/analysis.hpp"
#include "tma/error.hpp"
#include "tma/experiment.hpp"
#include "tma/legendre.hpp"
#include "tma/ma_measure.hpp"
#include "tma/oracle.hpp"
#include "tma/sections.hpp"

struct tma_grid {
  tma::GridFunction gf;
};
struct tma_pl {
  tma::PLConvexFunction f;
};
struct tma_report {
  tma::ExperimentReport r;
};

namespace {

thread_local std::string g_error;

template <class F>
int guarded(F&& body) {
  try {
    body();
    g_error.clear();
    return TMA_OK;
  } catch (const tma::Error& e) {
    g_error = e.what();
    return static_cast<int>(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_error = std::string("invalid JSON: ") + e.what();
    return TMA_ERR_CONFIG_INVALID;
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
    return TMA_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_error = e.what();
    return TMA_ERR_INTERNAL;
  } catch (...) {
    g_error = "unknown failure";
    return TMA_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) tma::fail(tma::ErrorCode::invalid_argument, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

tma::Domain2D to_domain(const tma_domain* d) {
  need(d, "domain");
  switch (d->kind) {
    case TMA_DOMAIN_SQUARE: return tma::Domain2D::square(d->size);
    case TMA_DOMAIN_DISK: return tma::Domain2D::disk(d->size);
    case TMA_DOMAIN_POLYGON: {
      if (d->n_vertices > 0) need(d->vertices, "vertices");
      std::vector<tma::Vec2> v(d->n_vertices);
      for (size_t i = 0; i < d->n_vertices; ++i) v[i] = {d->vertices[2 * i], d->vertices[2 * i + 1]};
      return tma::Domain2D::polygon(v);
    }
    default: tma::fail(tma::ErrorCode::invalid_argument, "unknown domain kind");
  }
}

tma::Field to_field(int source, double alpha, double eta) {
  switch (source) {
    case TMA_SOURCE_QUADRATIC: return [](tma::Vec2 x) { return 0.5 * tma::norm2(x); };
    case TMA_SOURCE_ORACLE_PRIMAL:
      tma::require_alpha(alpha);
      return [alpha](tma::Vec2 x) { return tma::radial_primal_value(alpha, tma::norm(x)); };
    case TMA_SOURCE_ORACLE_DUAL:
      tma::require_alpha(alpha);
      return [alpha, eta](tma::Vec2 x) { return tma::radial_dual_value(alpha, tma::norm(x), eta); };
    case TMA_SOURCE_SEPARABLE: {
      const auto s = tma::SeparableSolution::make(alpha);
      return [s](tma::Vec2 x) { return s(x); };
    }
    default: tma::fail(tma::ErrorCode::invalid_argument, "unknown source");
  }
}

}  // namespace

extern "C" {

const char* tma_last_error_message(void) { return g_error.c_str(); }

const char* tma_status_name(int status) {
  if (status < 0 || status > TMA_ERR_INTERNAL) return "unknown";
  return tma::error_code_name(static_cast<tma::ErrorCode>(status));
}

const char* tma_version(void) { return "1.0.0"; }

void tma_string_free(char* s) { std::free(s); }

int tma_radial_primal_slope(double alpha, double r, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = tma::radial_primal_slope(alpha, r);
  });
}

int tma_radial_primal_value(double alpha, double r, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = tma::radial_primal_value(alpha, r);
  });
}

int tma_radial_dual_slope(double alpha, double r, double eta, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = tma::radial_dual_slope(alpha, r, eta);
  });
}

int tma_radial_dual_value(double alpha, double r, double eta, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = tma::radial_dual_value(alpha, r, eta);
  });
}

int tma_separable_value(double alpha, double a, double x1, double x2, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = tma::separable_value(alpha, a, {x1, x2});
  });
}

int tma_grid_sample(const tma_domain* domain, double h, int source, double alpha, double eta, tma_grid** out) {
  return guarded([&] {
    need(out, "out");
    *out = new tma_grid{tma::sample(to_field(source, alpha, eta), to_domain(domain), h)};
  });
}

int tma_grid_from_values(const tma_domain* domain, double h, const double* values, size_t n, tma_grid** out) {
  return guarded([&] {
    need(out, "out");
    const tma::Domain2D d = to_domain(domain);
    std::vector<tma::Vec2> nodes = tma::lattice_nodes(d, h);
    if (nodes.size() != n)
      tma::fail(tma::ErrorCode::invalid_argument,
                "expected " + std::to_string(nodes.size()) + " values, got " + std::to_string(n));
    if (n > 0) need(values, "values");
    *out = new tma_grid{tma::GridFunction(d, h, std::move(nodes), std::vector<double>(values, values + n))};
  });
}

int tma_grid_load(const char* path, tma_grid** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new tma_grid{tma::load(path)};
  });
}

int tma_grid_save(const tma_grid* grid, const char* path) {
  return guarded([&] {
    need(grid, "grid");
    need(path, "path");
    tma::save(grid->gf, path);
  });
}

size_t tma_grid_size(const tma_grid* grid) { return grid ? grid->gf.size() : 0; }

double tma_grid_spacing(const tma_grid* grid) { return grid ? grid->gf.h() : 0.0; }

int tma_grid_data(const tma_grid* grid, double* xy, double* values) {
  return guarded([&] {
    need(grid, "grid");
    for (size_t k = 0; k < grid->gf.size(); ++k) {
      if (xy) {
        xy[2 * k] = grid->gf.node(k).x;
        xy[2 * k + 1] = grid->gf.node(k).y;
      }
      if (values) values[k] = grid->gf.value(k);
    }
  });
}

void tma_grid_free(tma_grid* grid) { delete grid; }

int tma_legendre(const tma_grid* u, double h_dual, int brute_force, tma_grid** dual) {
  return guarded([&] {
    need(u, "u");
    need(dual, "dual");
    const auto method = brute_force ? tma::ConjugateMethod::brute_force : tma::ConjugateMethod::separable;
    auto r = tma::legendre_transform(u->gf, tma::default_dual_domain(u->gf, h_dual), h_dual, method);
    *dual = new tma_grid{std::move(r.dual)};
  });
}

int tma_biconjugate(const tma_grid* u, double h_dual, tma_grid** out) {
  return guarded([&] {
    need(u, "u");
    need(out, "out");
    *out = new tma_grid{tma::biconjugate(u->gf, h_dual)};
  });
}

int tma_pl_create(const double* xy, const double* heights, size_t n, tma_pl** out) {
  return guarded([&] {
    need(xy, "xy");
    need(heights, "heights");
    need(out, "out");
    std::vector<tma::Vec2> sites(n);
    for (size_t i = 0; i < n; ++i) sites[i] = {xy[2 * i], xy[2 * i + 1]};
    *out = new tma_pl{tma::PLConvexFunction(std::move(sites), std::vector<double>(heights, heights + n))};
  });
}

size_t tma_pl_size(const tma_pl* f) { return f ? f->f.size() : 0; }

int tma_pl_masses(const tma_pl* f, double* masses) {
  return guarded([&] {
    need(f, "f");
    need(masses, "masses");
    const tma::MAMeasure m = tma::ma_measure(f->f);
    std::copy(m.masses.begin(), m.masses.end(), masses);
  });
}

int tma_pl_cells_csv(const tma_pl* f, char** csv) {
  return guarded([&] {
    need(f, "f");
    need(csv, "csv");
    *csv = dup_string(tma::cells_to_csv(tma::subgradient_cells(f->f)));
  });
}

void tma_pl_free(tma_pl* f) { delete f; }

int tma_john_ellipsoid(const double* xy, size_t n, double center[2], double B[4], double A[4]) {
  return guarded([&] {
    need(xy, "xy");
    tma::Polygon pts(n);
    for (size_t i = 0; i < n; ++i) pts[i] = {xy[2 * i], xy[2 * i + 1]};
    const tma::EllipsoidFit fit = tma::john_ellipsoid(pts);
    if (center) center[0] = fit.center.x, center[1] = fit.center.y;
    if (B) B[0] = fit.B.a11, B[1] = fit.B.a12, B[2] = fit.B.a21, B[3] = fit.B.a22;
    if (A) A[0] = fit.A.a11, A[1] = fit.A.a12, A[2] = fit.A.a21, A[3] = fit.A.a22;
  });
}

int tma_dt_matrix(double t, double alpha, double out[4]) {
  return guarded([&] {
    need(out, "out");
    const tma::Mat2 m = tma::dt_matrix(t, alpha);
    out[0] = m.a11, out[1] = m.a12, out[2] = m.a21, out[3] = m.a22;
  });
}

int tma_gamma_membership(double x1, double x2, double alpha, double theta, int* region) {
  return guarded([&] {
    need(region, "region");
    *region = static_cast<int>(tma::gamma_membership({x1, x2}, alpha, theta));
  });
}

int tma_growth_exponent(int source, double alpha, double rmin, double rmax, int n_circles, double* slope,
                        double* ratio_proxy) {
  return guarded([&] {
    need(slope, "slope");
    tma::GrowthOptions opt;
    if (source == TMA_SOURCE_ORACLE_DUAL) opt.slope_theory = 1.0 / (2.0 * alpha);
    else if (source == TMA_SOURCE_ORACLE_PRIMAL) opt.slope_theory = 1.0 / (1.0 - 2.0 * alpha);
    const tma::GrowthFit fit = tma::growth_exponent(to_field(source, alpha, 1.0), rmin, rmax, n_circles, opt);
    *slope = fit.slope;
    if (ratio_proxy) *ratio_proxy = fit.ratio_proxy;
  });
}

int tma_validate_config(const char* config_json, char** violations) {
  return guarded([&] {
    need(config_json, "config");
    need(violations, "violations");
    nlohmann::json list = nlohmann::json::array();
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(config_json);
      for (const auto& v : tma::validate_config(j)) list.push_back(v);
    } catch (const nlohmann::json::parse_error& e) {
      list.push_back(std::string(": invalid JSON: ") + e.what());
    }
    *violations = dup_string(list.dump());
  });
}

int tma_run_experiment(const char* config_json, tma_report** out) {
  return guarded([&] {
    need(config_json, "config");
    need(out, "out");
    const tma::ExperimentConfig cfg = tma::parse_config(nlohmann::json::parse(config_json));
    *out = new tma_report{tma::run(cfg)};
  });
}

int tma_report_json(const tma_report* r, char** json) {
  return guarded([&] {
    need(r, "report");
    need(json, "json");
    *json = dup_string(r->r.report.dump(2));
  });
}

int tma_report_summary(const tma_report* r, char** text) {
  return guarded([&] {
    need(r, "report");
    need(text, "text");
    std::string s;
    for (const auto& v : r->r.verdicts) {
      s += (v.pass ? "PASS " : "FAIL ") + v.name + " measured=" + tma::format_double(v.measured) +
           " expected=" + tma::format_double(v.expected) + " tol=" + tma::format_double(v.tolerance) + " (" +
           v.comparison + ")\n";
    }
    *text = dup_string(s);
  });
}

int tma_report_exit_code(const tma_report* r) { return r ? r->r.exit_code() : 3; }

void tma_report_free(tma_report* r) { delete r; }

}  // extern "C"
