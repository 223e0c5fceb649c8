#ifndef EHC_VERIFICATION_HPP
#define EHC_VERIFICATION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ehc/analytics.hpp"

namespace ehc {

// Thresholds the verification grid checks against. Defaults are the
// published constants; overriding one is how the negative-control test makes
// the suite fail on purpose.
struct GapConstants {
  double policy_gap = constants::kPolicyGap;
  double capacity_gap = constants::kCapacityGap;
  double two_level_gap = constants::kTwoLevelGap;
};

struct VerifyOptions {
  std::uint64_t seed = 42;
  unsigned threads = 0;
  // Renewal-reward check.
  std::int64_t renewal_horizon = 1'000'000;
  std::int64_t renewal_trials = 50;
  // Uniform-policy divergence check.
  std::int64_t divergence_horizon = 1'000'000;
  std::int64_t divergence_trials = 20;
  // Simulation property suite.
  std::int64_t property_cases = 1000;
  std::int64_t property_steps = 10'000;
  GapConstants constants;
};

struct CheckResult {
  std::string id;
  std::string description;
  bool passed = false;
  nlohmann::json analytic = nlohmann::json::object();     // seed-independent
  nlohmann::json monte_carlo = nlohmann::json::object();  // seed-dependent
  double seconds = 0.0;
};

// Parameter grids shared by the gap checks.
const std::vector<double>& verification_p_grid();
const std::vector<double>& verification_budget_grid();

// Individual checks. Random profile draws for the analytic checks use a fixed
// internal seed so their output never depends on options.seed.
CheckResult check_policy_gap(const VerifyOptions& options);
CheckResult check_capacity_sandwich(const VerifyOptions& options);
CheckResult check_renewal_reward(const VerifyOptions& options);
CheckResult check_uniform_divergence(const VerifyOptions& options);
CheckResult check_proof_constants(const VerifyOptions& options);
CheckResult check_general_profiles(const VerifyOptions& options);
CheckResult check_simulation_invariants(const VerifyOptions& options);
CheckResult check_thread_determinism(const VerifyOptions& options);

std::vector<CheckResult> run_verification(const VerifyOptions& options);

nlohmann::json verification_report(const std::vector<CheckResult>& results,
                                   const VerifyOptions& options);

}  // namespace ehc

#endif  // EHC_VERIFICATION_HPP
