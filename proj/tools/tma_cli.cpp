// Command-line driver. Talks to the library only through the C API.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tma/tma.h"

namespace {

const std::vector<std::string> kExperiments = {"oracle",  "solve",    "sections",    "growth",
                                               "cascade", "doubling", "verify-dual", "verify-translator"};

struct Flags {
  std::string config;
  double alpha = 0, eta = 0, h = 0, size = 0, rmin = 0, rmax = 0, first = 0, ratio = 0, tol = 0;
  std::uint64_t seed = 0;
  int n_circles = 0, count = 0;
  long max_iters = 0;
  std::string output_dir, domain, source, rhs, scheme;
  std::vector<std::uint64_t> samples;
  std::string experiment;
  std::map<std::string, CLI::Option*> opt;
};

void add_flags(CLI::App* app, Flags& f) {
  app->set_help_flag("--help", "print this help");
  f.opt["config"] = app->add_option("--config", f.config, "JSON configuration; flags override it");
  f.opt["alpha"] = app->add_option("--alpha", f.alpha, "flow exponent in (0, 1/4)");
  f.opt["eta"] = app->add_option("--eta", f.eta, "dual right-hand-side shift in [0, 1]");
  f.opt["seed"] = app->add_option("--seed", f.seed, "random seed");
  f.opt["output_dir"] = app->add_option("-o,--output-dir", f.output_dir, "directory for report and data files");
  f.opt["domain"] = app->add_option("--domain", f.domain, "square or disk")->check(CLI::IsMember({"square", "disk"}));
  f.opt["size"] = app->add_option("--radius,--half-width", f.size, "domain radius or half-width");
  f.opt["h"] = app->add_option("--h", f.h, "lattice spacing");
  f.opt["source"] = app->add_option("--source", f.source, "function under study");
  f.opt["rhs"] = app->add_option("--rhs", f.rhs, "constant, translator or degenerate");
  f.opt["rmin"] = app->add_option("--rmin", f.rmin, "smallest growth radius");
  f.opt["rmax"] = app->add_option("--rmax", f.rmax, "largest growth radius");
  f.opt["n_circles"] = app->add_option("--n-circles", f.n_circles, "number of growth circles");
  f.opt["first"] = app->add_option("--level-first", f.first, "first section level");
  f.opt["count"] = app->add_option("--level-count", f.count, "number of section levels");
  f.opt["ratio"] = app->add_option("--level-ratio", f.ratio, "ratio between levels");
  f.opt["samples"] = app->add_option("--samples", f.samples, "doubling sample sizes");
  f.opt["tol"] = app->add_option("--tol", f.tol, "solver relative mass tolerance");
  f.opt["max_iters"] = app->add_option("--max-iters", f.max_iters, "solver iteration budget");
  f.opt["scheme"] =
      app->add_option("--scheme", f.scheme, "newton or oliker-prussner")->check(CLI::IsMember({"newton", "oliker-prussner"}));
}

bool given(const Flags& f, const char* name) { return f.opt.at(name)->count() > 0; }

nlohmann::json build_config(const Flags& f) {
  nlohmann::json j = nlohmann::json::object();
  if (given(f, "config")) {
    std::ifstream in(f.config);
    if (!in) throw std::runtime_error("cannot open " + f.config);
    j = nlohmann::json::parse(in);
  }
  if (!j.is_object()) throw std::runtime_error("configuration must be a JSON object");
  if (!f.experiment.empty()) j["experiment"] = f.experiment;
  if (given(f, "alpha")) j["alpha"] = f.alpha;
  if (given(f, "eta")) j["eta"] = f.eta;
  if (given(f, "seed")) j["seed"] = f.seed;
  if (given(f, "output_dir")) j["output_dir"] = f.output_dir;
  if (given(f, "domain") || given(f, "size")) {
    std::string kind = "disk";
    if (given(f, "domain")) kind = f.domain;
    else if (j.contains("domain") && j["domain"].is_object() && j["domain"].contains("kind")) kind = j["domain"]["kind"];
    nlohmann::json d{{"kind", kind}};
    d[kind == "square" ? "half_width" : "radius"] = given(f, "size") ? f.size : 1.0;
    j["domain"] = d;
  }
  if (given(f, "h")) j["h"] = f.h;
  if (given(f, "source")) j["source"] = f.source;
  if (given(f, "rhs")) j["rhs"] = f.rhs;
  if (given(f, "rmin")) j["rmin"] = f.rmin;
  if (given(f, "rmax")) j["rmax"] = f.rmax;
  if (given(f, "n_circles")) j["n_circles"] = f.n_circles;
  if (given(f, "first")) j["levels"]["first"] = f.first;
  if (given(f, "count")) j["levels"]["count"] = f.count;
  if (given(f, "ratio")) j["levels"]["ratio"] = f.ratio;
  if (given(f, "samples")) j["samples"] = f.samples;
  if (given(f, "tol")) j["solver"]["tol"] = f.tol;
  if (given(f, "max_iters")) j["solver"]["max_iters"] = f.max_iters;
  if (given(f, "scheme")) j["solver"]["scheme"] = f.scheme;
  return j;
}

int exit_for(int status) { return status == TMA_ERR_CONFIG_INVALID ? 2 : 3; }

int report_error(int status) {
  std::fprintf(stderr, "error: %s: %s\n", tma_status_name(status), tma_last_error_message());
  return exit_for(status);
}

int run_experiment(const Flags& f) {
  nlohmann::json cfg;
  try {
    cfg = build_config(f);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: config_invalid: %s\n", e.what());
    return 2;
  }
  const std::string text = cfg.dump();
  char* violations = nullptr;
  int st = tma_validate_config(text.c_str(), &violations);
  if (st != TMA_OK) return report_error(st);
  const auto list = nlohmann::json::parse(violations);
  tma_string_free(violations);
  if (!list.empty()) {
    for (const auto& v : list) std::fprintf(stderr, "error: config_invalid: %s\n", v.get<std::string>().c_str());
    return 2;
  }
  tma_report* report = nullptr;
  st = tma_run_experiment(text.c_str(), &report);
  if (st != TMA_OK) return report_error(st);
  char* summary = nullptr;
  tma_report_summary(report, &summary);
  std::fputs(summary, stdout);
  tma_string_free(summary);
  const int code = tma_report_exit_code(report);
  std::printf("%s: report written to %s/report.json\n", code == 0 ? "pass" : "fail",
              cfg.value("output_dir", std::string("tma-out")).c_str());
  tma_report_free(report);
  return code;
}

int validate(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "error: io_error: cannot open %s\n", path.c_str());
    return 3;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  char* violations = nullptr;
  const int st = tma_validate_config(ss.str().c_str(), &violations);
  if (st != TMA_OK) return report_error(st);
  const auto list = nlohmann::json::parse(violations);
  tma_string_free(violations);
  for (const auto& v : list) std::printf("%s\n", v.get<std::string>().c_str());
  if (list.empty()) std::printf("ok\n");
  return list.empty() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monge-Ampere toolkit for Gauss curvature flow translators"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tma_version()));

  Flags run_flags;
  CLI::App* run = app.add_subcommand("run", "run an experiment");
  run->add_option("experiment", run_flags.experiment, "experiment name")
      ->required()
      ->check(CLI::IsMember(kExperiments));
  add_flags(run, run_flags);

  std::vector<Flags> direct(kExperiments.size());
  std::vector<CLI::App*> direct_apps;
  for (std::size_t k = 0; k < kExperiments.size(); ++k) {
    direct[k].experiment = kExperiments[k];
    direct_apps.push_back(app.add_subcommand(kExperiments[k], "run the " + kExperiments[k] + " experiment"));
    add_flags(direct_apps.back(), direct[k]);
  }

  std::string config_path;
  CLI::App* val = app.add_subcommand("validate", "check a configuration file");
  val->add_option("config", config_path, "JSON configuration")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (*run) return run_experiment(run_flags);
  if (*val) return validate(config_path);
  for (std::size_t k = 0; k < direct_apps.size(); ++k)
    if (*direct_apps[k]) return run_experiment(direct[k]);
  return 2;
}
