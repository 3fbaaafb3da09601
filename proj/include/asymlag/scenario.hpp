#pragma once

#include "asymlag/grid.hpp"
#include "asymlag/lagrangian.hpp"
#include "asymlag/operators.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace asymlag {

/// Malformed or inconsistent scenario config. field() is the dotted path of
/// the offending entry, e.g. "params.g_grid.n_steps".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class Task { IbpCheck, EmbedDemo, Residual, Extremal, Coherence, Solve, Reversibility, Composition };
const char* to_string(Task task);

struct GridSpec {
  double a = 0.0;
  double b = 1.0;
  int n_steps = 100;
  /// Replaces an infinite endpoint ("-inf" / "inf") by -radius / +radius.
  std::optional<double> truncation_radius;
  bool a_infinite = false;
  bool b_infinite = false;
  TimeGrid grid() const;
};

struct OperatorSpec {
  std::string kind = "classical";  // classical | finite_difference | fractional
  std::optional<double> eps;
  std::optional<double> alpha;
  std::optional<double> tau;
  /// fractional with alpha = 1 resolves to the classical pair.
  OperatorKind resolve() const;
};

struct LagrangianSpec {
  std::string family = "oscillator";  // free | oscillator
  double omega = 1.0;
  Lagrangian resolve() const;
};

struct OutputSpec {
  std::string dir = ".";
  std::string prefix;  // defaults to the task name
};

struct Scenario {
  Task task = Task::Solve;
  std::uint64_t seed = 0;
  GridSpec grid;
  OperatorSpec op;
  LagrangianSpec lagrangian;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();  // resolved, defaults filled in
  OutputSpec output;
};

/// Strict parse: unknown fields, wrong types and out-of-range values throw
/// ConfigError naming the field. Task parameters are validated and their
/// defaults made explicit in Scenario::params.
Scenario parse_scenario(const nlohmann::json& config);
Scenario parse_scenario_text(const std::string& text);

/// The resolved config; parse_scenario(resolved_config(s)) reproduces s.
nlohmann::ordered_json resolved_config(const Scenario& s);

struct RunResult {
  int exit_code = 0;  // 0 success / PASS, 2 check FAIL
  nlohmann::ordered_json summary;
  std::vector<std::filesystem::path> files;
};

/// Executes the scenario and writes its artifacts under output.dir:
/// <prefix>.csv, <prefix>_summary.json and <prefix>.dat (plot data).
RunResult run_scenario(const Scenario& s);

/// Reads, parses and runs a config file. Returns the process exit code
/// (1 on any error, with a diagnostic on `err`).
int run_config_file(const std::filesystem::path& path, std::ostream& out, std::ostream& err);

/// Human-readable description of the config format.
std::string config_schema();

}  // namespace asymlag
