#ifndef EHC_ANALYTICS_HPP
#define EHC_ANALYTICS_HPP

#include <optional>

#include <json.hpp>

#include "ehc/energy_profiles.hpp"

namespace ehc {

// Published gap constants, in bits. Kept at their printed precision so that
// reported gaps line up with the published guarantees. The Ozarow-Wyner loss
// evaluates to 1.0471 before rounding (0.5*log2(3) + 0.5*log2(pi*e/6)).
namespace constants {
inline constexpr double kPolicyGap = 0.973;
inline constexpr double kOzarowWynerLoss = 1.04;
inline constexpr double kCapacityGap = 2.58;
inline constexpr double kTwoLevelGap = 3.08;
// p * min(B_max, E) thresholds below which the upper bound alone is within
// the policy gap, resp. the capacity gap.
inline constexpr double kPolicyGapThreshold = 2.853;
inline constexpr double kCapacityGapThreshold = 34.75;
}  // namespace constants

// 0.5 * log2(1 + g), bits per channel use.
double awgn_rate(double g);

double binary_entropy(double p);

// Long-run rate of the constant-fraction epoch policy,
//   sum_j p (1-p)^j * awgn_rate(p (1-p)^j * budget).
// Terms are kept until the tail bound (1-p)^J * awgn_rate(p * budget) drops
// below tol, then summed smallest-first with compensation.
double policy_rate_series(double p, double budget, double tol = 1e-12);

// awgn_rate(p * min(b_max, e)); also the approximate capacity.
double upper_bound(double p, double b_max, double e);

// Uniform-input rate over an amplitude-constrained AWGN channel with energy
// e_j. May be negative.
double ozarow_wyner_lb(double e_j);

// 1.04 + H(p): cost of dropping receiver knowledge of the arrival times.
double side_information_penalty(double p);

double capacity_lower_bound(double p, double b_max, double e);

struct BoundsReport {
  double upper = 0.0;
  double lower = 0.0;
  std::optional<double> achieved_series;
  double gap = 0.0;
};

// Bernoulli arrivals. Throws std::logic_error if the 2.58-bit guarantee fails.
BoundsReport bernoulli_report(double p, double b_max, double e);

// Arbitrary i.i.d. arrivals: upper from the truncated mean, lower from the
// best Bernoulli reduction minus 2.58 bits. achieved_series is the
// constant-fraction rate on the reduced Bernoulli system.
BoundsReport general_bounds(const EnergyProfile& profile, double b_max);

// 0.5 * log2((1 + truncated_mean) / (1 + reduction value)) + 2.58: the gap of
// general_bounds before the lower bound is clamped at zero.
double gap_bound_ratio(const EnergyProfile& profile, double b_max);

// truncated_mean / reduction value; at least 1, at most k for k-level arrivals.
double area_ratio(const EnergyProfile& profile, double b_max);

enum class UniformRegime { Saturated, BatteryLimited, DegenerateBernoulli };

struct UniformProfileReport {
  double approx_capacity;
  double gap_bound;
  UniformRegime regime;
};

UniformProfileReport uniform_profile_report(double a1, double a2, double b_max);

// ((1-p) / 2p) * log2(1 / (1-p)); decreasing on (0,1) towards 1/(2 ln 2).
double fraction_penalty(double p);

struct ProofConstants {
  double policy_threshold_rate;     // awgn_rate(2.853)
  double policy_threshold_slack;    // 1 / (2 ln2 * 2.853)
  double fraction_penalty_small_p;  // fraction_penalty(1e-6)
  double fraction_penalty_limit;    // 1 / (2 ln 2)
  double capacity_penalty_max;      // max_p fraction_penalty(p) + H(p)
  double capacity_penalty_argmax;
  double capacity_threshold_rate;   // awgn_rate(34.75)
  double capacity_threshold_slack;  // 1 / (2 ln2 * 34.75) + 1.04
};

ProofConstants proof_constants();

void to_json(nlohmann::json& j, const BoundsReport& report);

}  // namespace ehc

#endif  // EHC_ANALYTICS_HPP
