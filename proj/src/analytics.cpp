#include "ehc/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ehc/errors.hpp"
#include "ehc/golden_section.hpp"

namespace ehc {

namespace {

void require_probability(double p, const char* op) {
  if (!(std::isfinite(p) && p > 0.0 && p <= 1.0)) {
    throw DomainError(std::string(op) + ": p must lie in (0, 1]");
  }
}

void require_energy(double e, const char* op) {
  if (!(e >= 0.0)) throw DomainError(std::string(op) + ": energy must be >= 0");
}

}  // namespace

double awgn_rate(double g) {
  if (!(g >= 0.0)) throw DomainError("awgn_rate: g must be >= 0");
  return 0.5 * std::log1p(g) / std::numbers::ln2;
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binary_entropy: p must lie in [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

double policy_rate_series(double p, double budget, double tol) {
  require_probability(p, "policy_rate_series");
  require_energy(budget, "policy_rate_series");
  if (!(tol > 0.0)) throw DomainError("policy_rate_series: tol must be > 0");
  const double lead = awgn_rate(p * budget);
  if (lead == 0.0) return 0.0;

  const double q = 1.0 - p;
  std::int64_t terms = 0;
  for (double weight = 1.0; weight * lead >= tol; weight *= q) ++terms;

  // Neumaier summation, smallest terms first.
  double sum = 0.0;
  double carry = 0.0;
  for (std::int64_t j = terms - 1; j >= 0; --j) {
    const double share = p * std::pow(q, static_cast<double>(j));
    const double term = share * awgn_rate(share * budget);
    const double t = sum + term;
    carry += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return sum + carry;
}

double upper_bound(double p, double b_max, double e) {
  require_probability(p, "upper_bound");
  require_energy(b_max, "upper_bound");
  require_energy(e, "upper_bound");
  return awgn_rate(p * std::min(b_max, e));
}

double ozarow_wyner_lb(double e_j) {
  return awgn_rate(e_j) - constants::kOzarowWynerLoss;
}

double side_information_penalty(double p) {
  return constants::kOzarowWynerLoss + binary_entropy(p);
}

double capacity_lower_bound(double p, double b_max, double e) {
  require_probability(p, "capacity_lower_bound");
  require_energy(b_max, "capacity_lower_bound");
  require_energy(e, "capacity_lower_bound");
  const double achievable = policy_rate_series(p, std::min(b_max, e));
  return std::max(0.0, achievable - side_information_penalty(p));
}

BoundsReport bernoulli_report(double p, double b_max, double e) {
  BoundsReport report;
  report.upper = upper_bound(p, b_max, e);
  report.lower = capacity_lower_bound(p, b_max, e);
  report.achieved_series = policy_rate_series(p, std::min(b_max, e));
  report.gap = report.upper - report.lower;
  if (report.gap > constants::kCapacityGap + 1e-12) {
    throw std::logic_error("bernoulli_report: capacity gap above 2.58 bits");
  }
  return report;
}

BoundsReport general_bounds(const EnergyProfile& profile, double b_max) {
  validate(profile);
  const auto reduction = best_reduction(profile, b_max);
  BoundsReport report;
  report.upper = awgn_rate(truncated_mean(profile, b_max));
  report.lower = std::max(0.0, awgn_rate(reduction.value) - constants::kCapacityGap);
  report.achieved_series = policy_rate_series(reduction.p_red, reduction.x);
  report.gap = report.upper - report.lower;
  return report;
}

double gap_bound_ratio(const EnergyProfile& profile, double b_max) {
  const double area = truncated_mean(profile, b_max);
  const double rectangle = best_reduction(profile, b_max).value;
  const double bound = 0.5 * std::log2((1.0 + area) / (1.0 + rectangle)) + constants::kCapacityGap;
  if (general_bounds(profile, b_max).gap > bound + 1e-9) {
    throw std::logic_error("gap_bound_ratio: measured gap exceeds the ratio bound");
  }
  return bound;
}

double area_ratio(const EnergyProfile& profile, double b_max) {
  return truncated_mean(profile, b_max) / best_reduction(profile, b_max).value;
}

UniformProfileReport uniform_profile_report(double a1, double a2, double b_max) {
  validate(UniformInterval{a1, a2});
  require_energy(b_max, "uniform_profile_report");
  const double midpoint = 0.5 * (a1 + a2);
  if (b_max >= midpoint) {
    return {awgn_rate(midpoint), constants::kTwoLevelGap, UniformRegime::Saturated};
  }
  if (b_max >= a1) {
    return {awgn_rate(b_max), constants::kTwoLevelGap, UniformRegime::BatteryLimited};
  }
  return {awgn_rate(b_max), constants::kCapacityGap, UniformRegime::DegenerateBernoulli};
}

double fraction_penalty(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("fraction_penalty: p must lie in (0, 1)");
  return (1.0 - p) / (2.0 * p) * (-std::log1p(-p) / std::numbers::ln2);
}

ProofConstants proof_constants() {
  constexpr double kInvTwoLn2 = 1.0 / (2.0 * std::numbers::ln2);
  ProofConstants out{};
  out.policy_threshold_rate = awgn_rate(constants::kPolicyGapThreshold);
  out.policy_threshold_slack = kInvTwoLn2 / constants::kPolicyGapThreshold;
  out.fraction_penalty_small_p = fraction_penalty(1e-6);
  out.fraction_penalty_limit = kInvTwoLn2;
  const auto peak = golden_section_maximize(
      [](double p) { return fraction_penalty(p) + binary_entropy(p); }, 1e-9, 1.0 - 1e-9, 1e-6);
  out.capacity_penalty_max = peak.value;
  out.capacity_penalty_argmax = peak.x;
  out.capacity_threshold_rate = awgn_rate(constants::kCapacityGapThreshold);
  out.capacity_threshold_slack =
      kInvTwoLn2 / constants::kCapacityGapThreshold + constants::kOzarowWynerLoss;
  return out;
}

void to_json(nlohmann::json& j, const BoundsReport& report) {
  j = {{"upper_bits", report.upper},
       {"lower_bits", report.lower},
       {"series_bits", report.achieved_series ? nlohmann::json(*report.achieved_series)
                                              : nlohmann::json(nullptr)},
       {"gap_bits", report.gap}};
}

}  // namespace ehc
