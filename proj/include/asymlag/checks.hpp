#pragma once

#include "asymlag/operators.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace asymlag {

/// One row of the acceptance table.
struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double time_limit = 0.0;
};

enum class Profile { Full, Quick };

struct CheckOptions {
  Profile profile = Profile::Full;
  std::uint64_t seed = 20240611;
  /// GL weight generator used by the composition criterion (fault injection hook).
  WeightGenerator weights = gl_weights;
};

/// Observed order log2(coarse / fine) of an error sequence under step halving.
std::vector<double> observed_orders(const std::vector<double>& errors);

/// Convergence verdict used by the order-based criteria: every observed order
/// >= min_order, or every error already at the round-off floor.
struct ConvergenceSummary {
  std::vector<double> errors;
  std::vector<double> orders;
  bool at_floor = false;
  bool passed = false;
};
ConvergenceSummary summarize_convergence(const std::vector<double>& errors, double min_order, double floor);

CriterionResult check_ibp_duality(const CheckOptions& options);
CriterionResult check_causality(const CheckOptions& options);
CriterionResult check_coherence(const CheckOptions& options);
CriterionResult check_restricted_extremality(const CheckOptions& options);
CriterionResult check_anticausal_distinction(const CheckOptions& options);
CriterionResult check_oscillator_limits(const CheckOptions& options);
CriterionResult check_composition_identity(const CheckOptions& options);
CriterionResult check_reversibility(const CheckOptions& options);
CriterionResult check_gateaux_oracle(const CheckOptions& options);

/// Runs the selected criteria (1..9) in order; all of them when `selection`
/// is empty. Throws std::invalid_argument for an empty explicit selection or
/// an unknown id.
std::vector<CriterionResult> run_acceptance(const CheckOptions& options,
                                            const std::optional<std::vector<int>>& selection = std::nullopt);

/// `[PASS] 3 coherence ... (0.12 s)` lines, one per criterion.
std::string format_table(const std::vector<CriterionResult>& results);

}  // namespace asymlag
