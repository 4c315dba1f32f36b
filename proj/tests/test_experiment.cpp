#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "tma/error.hpp"
#include "tma/experiment.hpp"

using namespace tma;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

bool has_violation(const std::vector<std::string>& v, const std::string& pointer, const std::string& text = "") {
  return std::any_of(v.begin(), v.end(), [&](const std::string& m) {
    return m.rfind(pointer + ":", 0) == 0 && m.find(text) != std::string::npos;
  });
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tma_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("minimal configurations validate") {
  for (const char* e : {"oracle", "solve", "sections", "growth", "cascade", "verify-dual", "verify-translator"})
    CHECK(validate_config(json{{"experiment", e}}).empty());
  CHECK(validate_config(json{{"experiment", "doubling"}, {"seed", 3}}).empty());
}

TEST_CASE("validation reports each violation with a pointer") {
  CHECK(has_violation(validate_config(json::object()), "/experiment", "required"));
  CHECK(has_violation(validate_config(json{{"experiment", "bogus"}}), "/experiment", "must be one of"));

  auto v = validate_config(json{{"experiment", "oracle"}, {"alpha", 0.25}});
  CHECK(has_violation(v, "/alpha", "alpha must be < 0.25"));
  v = validate_config(json{{"experiment", "oracle"}, {"alpha", 0.0}});
  CHECK(has_violation(v, "/alpha", "alpha must be > 0"));
  v = validate_config(json{{"experiment", "oracle"}, {"alpha", "x"}});
  CHECK(has_violation(v, "/alpha", "number"));

  CHECK(has_violation(validate_config(json{{"experiment", "doubling"}}), "/seed", "required"));
  CHECK(has_violation(validate_config(json{{"experiment", "oracle"}, {"seed", -1}}), "/seed"));
  CHECK(has_violation(validate_config(json{{"experiment", "oracle"}, {"eta", 2.0}}), "/eta"));
  CHECK(has_violation(validate_config(json{{"experiment", "oracle"}, {"colour", 1}}), "/colour", "unknown"));
  CHECK(has_violation(validate_config(json{{"experiment", "growth"}, {"rmin", 10}, {"rmax", 5}}), "/rmax"));
  CHECK(has_violation(validate_config(json{{"experiment", "growth"}, {"n_circles", 3}}), "/n_circles"));
  CHECK(has_violation(validate_config(json{{"experiment", "growth"}, {"source", "separable"}}), "/source"));
  CHECK(has_violation(validate_config(json{{"experiment", "oracle"}, {"source", "quadratic"}}), "/source"));
  CHECK(has_violation(validate_config(json{{"experiment", "solve"}, {"rhs", "cubic"}}), "/rhs"));
  CHECK(has_violation(validate_config(json{{"experiment", "solve"}, {"h", -0.1}}), "/h"));
  CHECK(has_violation(validate_config(json{{"experiment", "solve"}, {"solver", {{"scheme", "jacobi"}}}}),
                      "/solver/scheme"));
  CHECK(has_violation(validate_config(json{{"experiment", "solve"}, {"tolerances", {{"k0", 0}}}}),
                      "/tolerances/k0"));
  CHECK(has_violation(validate_config(json{{"experiment", "solve"}, {"tolerances", {{"nope", 1}}}}),
                      "/tolerances/nope", "unknown"));
  CHECK(has_violation(validate_config(json{{"experiment", "doubling"}, {"seed", 1}, {"samples", {10, 0}}}),
                      "/samples/1"));
  CHECK(has_violation(validate_config(json{{"experiment", "sections"}, {"levels", {{"ratio", 1.0}}}}),
                      "/levels/ratio"));

  // Several problems are all reported.
  v = validate_config(json{{"experiment", "doubling"}, {"alpha", 1}, {"eta", -1}});
  CHECK(v.size() >= 3);
}

TEST_CASE("domain validation") {
  auto dom = [](json d) { return validate_config(json{{"experiment", "solve"}, {"domain", d}}); };
  CHECK(dom({{"kind", "square"}, {"half_width", 1.5}}).empty());
  CHECK(dom({{"kind", "disk"}, {"radius", 2}}).empty());
  CHECK(dom({{"kind", "polygon"}, {"vertices", {{0, 0}, {1, 0}, {0, 1}}}}).empty());
  CHECK(has_violation(dom({{"kind", "square"}}), "/domain/half_width", "required"));
  CHECK(has_violation(dom({{"kind", "disk"}, {"radius", 0}}), "/domain/radius"));
  CHECK(has_violation(dom({{"kind", "hexagon"}}), "/domain/kind"));
  CHECK(has_violation(dom({{"kind", "polygon"}, {"vertices", {{0, 0}, {1, 1}, {2, 2}}}}), "/domain/vertices"));
  CHECK(has_violation(dom({{"kind", "disk"}, {"radius", 1}, {"centre", 0}}), "/domain/centre", "unknown"));
}

TEST_CASE("parse and serialise configurations") {
  const json j = {{"experiment", "growth"},
                  {"alpha", 0.1},
                  {"seed", 42},
                  {"source", "oracle-primal"},
                  {"domain", {{"kind", "disk"}, {"radius", 3}}},
                  {"h", 0.05},
                  {"levels", {{"first", 2}, {"count", 4}, {"ratio", 3}}},
                  {"solver", {{"scheme", "oliker-prussner"}, {"max_iters", 50}}},
                  {"tolerances", {{"growth", 0.05}}}};
  const ExperimentConfig c = parse_config(j);
  CHECK(c.experiment == "growth");
  CHECK(c.alpha == 0.1);
  CHECK(c.seed == 42u);
  CHECK(c.source == "oracle-primal");
  CHECK(c.domain.has_value());
  CHECK(c.h == 0.05);
  CHECK(c.level_count == 4);
  CHECK(c.level_ratio == 3.0);
  CHECK(c.solver.scheme == SolverScheme::oliker_prussner);
  CHECK(c.solver.max_iters == 50);
  CHECK(c.tol.growth == 0.05);
  CHECK(c.tol.k0 == ExperimentConfig{}.tol.k0);

  // Defaults are filled in and the round trip is a fixed point.
  CHECK(parse_config(json{{"experiment", "cascade"}}).source == "separable");
  const auto once = config_to_json(c);
  CHECK(validate_config(json::parse(once.dump())).empty());
  const auto twice = config_to_json(parse_config(json::parse(once.dump())));
  CHECK(once.dump() == twice.dump());

  try {
    parse_config(json{{"experiment", "oracle"}, {"alpha", 0.5}});
    FAIL("no exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config_invalid);
    CHECK(std::string(e.what()).find("/alpha") != std::string::npos);
  }
}

TEST_CASE("config files") {
  const fs::path dir = scratch("cfg");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "bad.json") << "{\"experiment\": ";
    std::ofstream(dir / "good.json") << "{\"experiment\": \"oracle\", \"alpha\": 0.2}";
  }
  CHECK(validate_config_file((dir / "good.json").string()).empty());
  const auto bad = validate_config_file((dir / "bad.json").string());
  REQUIRE(bad.size() == 1);
  CHECK(bad[0].find("invalid JSON") != std::string::npos);
  try {
    validate_config_file((dir / "missing.json").string());
    FAIL("no exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io_error);
  }
  fs::remove_all(dir);
}

TEST_CASE("shipped configurations validate") {
  const fs::path dir = fs::path(TMA_SOURCE_DIR) / "configs";
  REQUIRE(fs::exists(dir));
  int n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".json") continue;
    ++n;
    const auto v = validate_config_file(e.path().string());
    std::string joined = e.path().string();
    for (const auto& m : v) joined += "\n" + m;
    INFO(joined);
    CHECK(v.empty());
  }
  CHECK(n > 0);
}

TEST_CASE("csv tables") {
  Table t;
  t.columns = {"r", "value", "slope"};
  t.rows = {{1.0, 0.1, 1e-300}, {2.5, -3.0, 0.30000000000000004}, {1e10, 5e-324, 123456789.123}};
  const std::string csv = table_to_csv(t);
  CHECK(csv.rfind("# r,value,slope", 0) == 0);
  const Table back = table_from_csv(csv);
  CHECK(back.columns == t.columns);
  CHECK(back.rows == t.rows);
  CHECK(table_to_csv(back) == csv);

  const std::string dat = table_to_dat(t);
  CHECK(dat.find(',') == std::string::npos);

  auto line_of = [](const std::string& text) {
    try {
      table_from_csv(text);
    } catch (const MalformedFile& e) {
      CHECK(e.code() == ErrorCode::malformed_file);
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("# a,b\n1,2\n3\n") == 3);
  CHECK(line_of("# a,b\n1,2\n3,x\n") == 3);
  CHECK(line_of("# a,b\n1,2x\n") == 2);
  CHECK(line_of("1,2\n") == 1);
  CHECK(line_of("# a\n1\n# b\n") == 3);
  CHECK(line_of("") == 1);
  CHECK(line_of("# a,b\n\n1,2\n") == -1);
}

TEST_CASE("reports are deterministic") {
  for (const char* name : {"oracle", "doubling", "growth"}) {
    INFO(name);
    const fs::path a = scratch(std::string("run_") + name);
    json j = {{"experiment", name}, {"seed", 11}, {"output_dir", a.string()}};
    if (std::string(name) == "doubling") j["samples"] = {200, 400};

    const ExperimentReport ra = run(parse_config(j));
    std::map<std::string, std::string> first;
    for (const auto& f : ra.files) {
      INFO(f);
      REQUIRE(fs::exists(a / f));
      first[f] = slurp(a / f);
    }
    const ExperimentReport rb = run(parse_config(j));
    CHECK(ra.files == rb.files);
    CHECK(std::find(ra.files.begin(), ra.files.end(), "report.json") != ra.files.end());
    CHECK(std::find(ra.files.begin(), ra.files.end(), "timings.json") != ra.files.end());
    for (const auto& f : ra.files) {
      INFO(f);
      const std::string text = slurp(a / f);
      if (f != "timings.json") CHECK(text == first[f]);
      if (f.size() > 4 && f.substr(f.size() - 4) == ".csv") CHECK_NOTHROW(table_from_csv(text));
    }
    const json rep = json::parse(first["report.json"]);
    CHECK(rep["pass"] == ra.pass());
    REQUIRE(rep["verdicts"].size() == ra.verdicts.size());
    for (const auto& v : rep["verdicts"]) CHECK(v.contains("tolerance"));
    CHECK(rep["config"]["seed"] == 11);
    CHECK(ra.exit_code() == (ra.pass() ? 0 : 1));
    fs::remove_all(a);
  }
}

TEST_CASE("doubling depends on the seed only through the samples") {
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  json j = {{"experiment", "doubling"}, {"samples", {300}}, {"seed", 1}, {"output_dir", a.string()}};
  const auto r1 = run(parse_config(j));
  j["seed"] = 2;
  j["output_dir"] = b.string();
  const auto r2 = run(parse_config(j));
  CHECK(json::parse(slurp(a / "report.json"))["outputs"] != json::parse(slurp(b / "report.json"))["outputs"]);
  CHECK(r1.verdicts.size() == r2.verdicts.size());
  fs::remove_all(a);
  fs::remove_all(b);
}
