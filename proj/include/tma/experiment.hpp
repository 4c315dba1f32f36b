#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tma/grid.hpp"
#include "tma/solver.hpp"

namespace tma {

struct Tolerances {
  double growth = 0.02;             // relative, fitted vs theoretical slope
  double solve_error = 0.01;        // max nodal error for the quadratic problem
  double dual_error = 0.02;         // relative nodal error vs the radial dual
  double dual_identity = 0.05;      // weighted-mass identity on annuli
  double translator = 0.03;         // translator identity relative residual
  double k0 = 1e-3;                 // |k0 - sqrt(4 pi)| for the quadratic family
  double k0_ratio = 3.0;            // max k0 / min k0 otherwise
  double cascade_slope = 0.05;      // relative, separable model
  double cascade_flat = 0.02;       // absolute, radial sources
  double doubling_exact = 1e-6;     // |estimate - 4| for f = 1
  double doubling_stability = 0.1;  // relative change between sample sizes
  double stability_M = 3.0;
  double stability_C1 = 4.0;
  double oracle = 1e-6;             // first-integral residual
};

struct ExperimentConfig {
  std::string experiment;
  double alpha = 0.125;
  double eta = 1.0;
  std::optional<std::uint64_t> seed;
  std::string output_dir = "tma-out";
  std::optional<Domain2D> domain;
  std::optional<double> h;
  std::string source;  // oracle-dual, oracle-primal, quadratic, separable, solve-dual
  std::string rhs;     // constant, translator, degenerate
  double rmin = 16.0;
  double rmax = 256.0;
  int n_circles = 5;
  double level_first = 1.0;
  int level_count = 8;
  double level_ratio = 2.0;
  std::vector<std::uint64_t> samples{1000, 10000};
  SolveOptions solver;
  Tolerances tol;
};

// One message per violation, each starting with a JSON pointer.
std::vector<std::string> validate_config(const nlohmann::json& config);
std::vector<std::string> validate_config_file(const std::string& path);

// Throws ConfigInvalid listing the violations.
ExperimentConfig parse_config(const nlohmann::json& config);
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);

struct Verdict {
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string comparison;  // "abs", "rel", "max"
  bool pass = false;
};

struct ExperimentReport {
  nlohmann::ordered_json report;   // deterministic, written to report.json
  nlohmann::ordered_json timings;  // wall-clock seconds, written to timings.json
  std::vector<Verdict> verdicts;
  std::vector<std::string> files;
  bool pass() const;
  int exit_code() const { return pass() ? 0 : 1; }
};

// Runs the experiment and writes its files into config.output_dir.
ExperimentReport run(const ExperimentConfig& config);

// Numeric table with a header line "# a,b,c" and comma-separated rows.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
std::string table_to_csv(const Table& t);
Table table_from_csv(const std::string& text);
std::string table_to_dat(const Table& t);

}  // namespace tma
