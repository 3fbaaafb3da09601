#include "asymlag/checks.hpp"
#include "asymlag/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"asymlag: asymmetric embedding of Lagrangian systems"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "Run a scenario config");
  run->add_option("config", config, "Scenario config (JSON)")->required();

  bool quick = true;
  std::vector<int> only;
  auto* selftest = app.add_subcommand("selftest", "Run the acceptance suite and print a PASS/FAIL table");
  selftest->add_flag("--full,!--quick", quick, "Full-size trial counts (default: reduced)");
  selftest->add_option("--only", only, "Criterion ids to run (1-9)")->expected(1, 9);

  app.add_subcommand("schema", "Print the config schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (*run) return asymlag::run_config_file(config, std::cout, std::cerr);

  if (*selftest) {
    try {
      asymlag::CheckOptions options;
      options.profile = quick ? asymlag::Profile::Quick : asymlag::Profile::Full;
      std::optional<std::vector<int>> selection;
      if (selftest->count("--only")) selection = only;
      const auto results = asymlag::run_acceptance(options, selection);
      std::cout << asymlag::format_table(results);
      for (const auto& r : results)
        if (!r.passed) return 2;
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }

  std::cout << asymlag::config_schema();
  return 0;
}
