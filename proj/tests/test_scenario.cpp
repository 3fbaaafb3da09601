#include "asymlag/scenario.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace asymlag;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("asymlag_scenario_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

json base(const char* task, const fs::path& dir) {
  return json{{"task", task},
              {"seed", 42},
              {"grid", {{"a", 0.0}, {"b", 1.0}, {"n_steps", 50}}},
              {"output", {{"dir", dir.string()}}}};
}

std::string field_of(const json& config) {
  try {
    (void)parse_scenario(config);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<accepted>";
}

}  // namespace

TEST_CASE("defaults are resolved explicitly") {
  const Scenario s = parse_scenario(json{{"task", "solve"}, {"seed", 1}, {"grid", {{"a", 0}, {"b", 1}, {"n_steps", 10}}}});
  CHECK(s.task == Task::Solve);
  CHECK(s.op.kind == "classical");
  CHECK(s.lagrangian.family == "oscillator");
  CHECK(s.output.prefix == "solve");
  const auto r = resolved_config(s);
  CHECK(r["params"]["direction"] == "forward");
  CHECK(r["params"]["x0"] == 1.0);
  CHECK(r["params"]["tol"] == 5e-2);
  CHECK(r["lagrangian"]["omega"] == 1.0);
}

TEST_CASE("strict parsing names the offending field") {
  const fs::path dir = scratch("strict");
  json c = base("solve", dir);
  c["extra"] = 1;
  CHECK(field_of(c) == "extra");
  c = base("solve", dir);
  c["grid"]["nsteps"] = 3;
  CHECK(field_of(c) == "grid.nsteps");
  c = base("solve", dir);
  c["grid"]["n_steps"] = "10";
  CHECK(field_of(c) == "grid.n_steps");
  c = base("solve", dir);
  c["grid"]["n_steps"] = 1;
  CHECK(field_of(c) == "grid.n_steps");
  c = base("solve", dir);
  c.erase("seed");
  CHECK(field_of(c) == "seed");
  c = base("solve", dir);
  c["seed"] = 1.5;
  CHECK(field_of(c) == "seed");
  c = base("solve", dir);
  c["operator"] = {{"kind", "fractional"}, {"alpha", 0.5}, {"taux", 1.0}};
  CHECK(field_of(c) == "operator.taux");
  c = base("solve", dir);
  c["operator"] = {{"kind", "fractional"}, {"alpha", 1.5}};
  CHECK(field_of(c) == "operator.alpha");
  c = base("solve", dir);
  c["operator"] = {{"kind", "caputo"}};
  CHECK(field_of(c) == "operator.kind");
  c = base("solve", dir);
  c["lagrangian"] = {{"family", "free"}, {"omega", 2.0}};
  CHECK(field_of(c) == "lagrangian.omega");
  c = base("solve", dir);
  c["params"] = {{"direction", "sideways"}};
  CHECK(field_of(c) == "params.direction");
  c = base("coherence", dir);
  c["params"] = {{"x", {{"shape", "sine"}, {"amp", 2}}}};
  CHECK(field_of(c) == "params.x.amp");
  c = base("solve", dir);
  c["output"]["format"] = "csv";
  CHECK(field_of(c) == "output.format");
  c = base("embed_demo", dir);
  c["params"] = {{"x_minus", {{"shape", "cos"}}}};  // only meaningful for branch general
  CHECK(field_of(c) == "params.x_minus");
  CHECK_THROWS_AS(parse_scenario_text("{\"task\": "), ConfigError);
}

TEST_CASE("infinite endpoints need a truncation radius") {
  const fs::path dir = scratch("inf");
  json c = base("ibp_check", dir);
  c["grid"] = {{"a", "-inf"}, {"b", 2.0}, {"n_steps", 100}};
  CHECK(field_of(c) == "grid.truncation_radius");
  c["grid"]["truncation_radius"] = 3.0;
  const Scenario s = parse_scenario(c);
  CHECK(s.grid.grid().a() == -3.0);
  CHECK(s.grid.grid().b() == 2.0);
  CHECK(resolved_config(s)["grid"]["a"] == "-inf");
  c["grid"]["a"] = "inf";
  CHECK(field_of(c) == "grid.a");
}

TEST_CASE("resolved config reproduces itself") {
  const fs::path dir = scratch("roundtrip");
  for (const char* task : {"ibp_check", "embed_demo", "residual", "extremal", "coherence", "solve", "reversibility",
                           "composition"}) {
    json c = base(task, dir);
    c["operator"] = {{"kind", "fractional"}, {"alpha", 0.5}};
    const auto once = resolved_config(parse_scenario(c));
    const auto twice = resolved_config(parse_scenario(json::parse(once.dump())));
    CHECK(once.dump() == twice.dump());
  }
}

TEST_CASE("reversibility of the classical oscillator") {
  const fs::path dir = scratch("rev");
  json c = base("reversibility", dir);
  c["grid"] = {{"a", 0.0}, {"b", 12.566370614359172}, {"n_steps", 4000}};
  c["operator"] = {{"kind", "fractional"}, {"alpha", 1.0}};
  c["params"] = {{"expect", "Reversible"}};
  const RunResult r = run_scenario(parse_scenario(c));
  CHECK(r.exit_code == 0);
  CHECK(r.summary["verdict"] == "Reversible");
  CHECK(r.summary["metrics"]["operator"] == "classical");
  const json summary = json::parse(slurp(dir / "reversibility_summary.json"));
  CHECK(summary["verdict"] == "Reversible");
  for (const char* key : {"task", "params", "metrics", "verdict"}) CHECK(summary.contains(key));
  CHECK(slurp(dir / "reversibility.csv").rfind("t,x0,x1\n", 0) == 0);

  c["operator"] = {{"kind", "fractional"}, {"alpha", 0.5}};
  c["grid"] = {{"a", 0.0}, {"b", 5.0}, {"n_steps", 5000}};
  const RunResult irr = run_scenario(parse_scenario(c));
  CHECK(irr.summary["verdict"] == "Irreversible");
  CHECK(irr.exit_code == 2);  // expectation not met
}

TEST_CASE("half-order oscillator matches exp(-t)") {
  const fs::path dir = scratch("solve");
  json c = base("solve", dir);
  c["grid"] = {{"a", 0.0}, {"b", 5.0}, {"n_steps", 1000}};
  c["operator"] = {{"kind", "fractional"}, {"alpha", 0.5}, {"tau", 1.0}};
  c["lagrangian"] = {{"family", "oscillator"}, {"omega", 1.0}};
  c["params"] = {{"tol", 1e-2}};
  const RunResult r = run_scenario(parse_scenario(c));
  CHECK(r.exit_code == 0);
  CHECK(r.summary["verdict"] == "PASS");
  CHECK(r.summary["metrics"]["max_rel_error"].get<double>() < 1e-2);
  std::istringstream csv(slurp(dir / "solve.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "t,x0");
  int rows = 0;
  while (std::getline(csv, line)) {
    const auto comma = line.find(',');
    const double t = std::stod(line.substr(0, comma));
    const double x = std::stod(line.substr(comma + 1));
    CHECK(std::abs(x - std::exp(-t)) < 1e-2);
    ++rows;
  }
  CHECK(rows == 1001);

  c["params"] = {{"tol", 1e-6}};
  CHECK(run_scenario(parse_scenario(c)).exit_code == 2);
}

TEST_CASE("ibp_check with mismatched grids is a config error") {
  const fs::path dir = scratch("ibp");
  json c = base("ibp_check", dir);
  c["params"] = {{"g_grid", {{"a", 0.0}, {"b", 1.0}, {"n_steps", 60}}}};
  CHECK(field_of(c) == "params.g_grid");
  const fs::path file = dir / "ibp.json";
  std::ofstream(file) << c.dump();
  std::ostringstream out, err;
  CHECK(run_config_file(file, out, err) == 1);
  CHECK(err.str().find("params.g_grid") != std::string::npos);

  c["params"] = {{"g_grid", {{"a", 0.0}, {"b", 1.0}, {"n_steps", 50}}}};
  c["operator"] = {{"kind", "finite_difference"}, {"eps", 0.04}};
  const RunResult r = run_scenario(parse_scenario(c));
  CHECK(r.exit_code == 0);
  CHECK(r.summary["metrics"]["relative_residual"].get<double>() <= 1e-10);
}

TEST_CASE("operator errors surface at run time with a field") {
  const fs::path dir = scratch("eps");
  json c = base("residual", dir);
  c["operator"] = {{"kind", "finite_difference"}, {"eps", 0.033}};
  try {
    (void)run_scenario(parse_scenario(c));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "operator.eps");
  }
}

TEST_CASE("numeric failures report the node") {
  const fs::path dir = scratch("nonfinite");
  json c = base("coherence", dir);
  c["params"] = {{"x", {{"shape", "exp"}, {"rate", 800.0}}}};
  const fs::path file = dir / "c.json";
  std::ofstream(file) << c.dump();
  std::ostringstream out, err;
  CHECK(run_config_file(file, out, err) == 1);
  CHECK(err.str().find("node") != std::string::npos);
}

TEST_CASE("every task runs and is deterministic") {
  const fs::path dir = scratch("all");
  for (const char* task : {"ibp_check", "embed_demo", "residual", "extremal", "coherence", "solve", "reversibility",
                           "composition"}) {
    CAPTURE(task);
    json c = base(task, dir);
    c["operator"] = {{"kind", "fractional"}, {"alpha", 0.5}};
    if (std::string(task) == "coherence") c["params"] = {{"x", {{"shape", "random_smooth"}, {"salt", 3}}}};
    const Scenario s = parse_scenario(c);
    const RunResult first = run_scenario(s);
    CHECK(first.exit_code == 0);
    REQUIRE(first.files.size() == 3);
    std::vector<std::string> bytes;
    for (const auto& f : first.files) bytes.push_back(slurp(f));
    const RunResult second = run_scenario(s);
    for (std::size_t i = 0; i < bytes.size(); ++i) CHECK(slurp(second.files[i]) == bytes[i]);
    // Re-running from the embedded resolved config reproduces the outputs.
    const json summary = json::parse(slurp(dir / (std::string(task) + "_summary.json")));
    const RunResult third = run_scenario(parse_scenario(summary["params"]));
    for (std::size_t i = 0; i < bytes.size(); ++i) CHECK(slurp(third.files[i]) == bytes[i]);
  }
}

TEST_CASE("seed drives random functions") {
  const fs::path dir = scratch("seed");
  json c = base("embed_demo", dir);
  c["params"] = {{"x", {{"shape", "random_smooth"}}}};
  const RunResult a = run_scenario(parse_scenario(c));
  const std::string csv_a = slurp(a.files[0]);
  c["seed"] = 43;
  const RunResult b = run_scenario(parse_scenario(c));
  CHECK(slurp(b.files[0]) != csv_a);
}

TEST_CASE("check tasks report FAIL with exit code 2") {
  const fs::path dir = scratch("fail");
  json c = base("coherence", dir);
  c["operator"] = {{"kind", "fractional"}, {"alpha", 0.7}};
  c["params"] = {{"space", "HPlus"}};
  const RunResult r = run_scenario(parse_scenario(c));
  CHECK(r.exit_code == 2);
  CHECK(r.summary["verdict"] == "FAIL");
  CHECK(r.summary["metrics"]["note"].get<std::string>().find("anticausal_plus") != std::string::npos);

  json e = base("extremal", dir);
  e["operator"] = {{"kind", "fractional"}, {"alpha", 0.5}};
  e["params"] = {{"space", "HPlus"}, {"expect", "extremal"}};
  const RunResult x = run_scenario(parse_scenario(e));
  CHECK(x.summary["verdict"] == "not_extremal");
  CHECK(x.exit_code == 2);
  e["params"] = {{"expect", "extremal"}};
  CHECK(run_scenario(parse_scenario(e)).exit_code == 0);
}

TEST_CASE("schema lists every task") {
  const std::string schema = config_schema();
  for (const char* task : {"ibp_check", "embed_demo", "residual", "extremal", "coherence", "solve", "reversibility",
                           "composition"})
    CHECK(schema.find(task) != std::string::npos);
}
