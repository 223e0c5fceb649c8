#ifndef EHC_POLICIES_HPP
#define EHC_POLICIES_HPP

#include <cstdint>
#include <string_view>
#include <variant>

#include <json.hpp>

namespace ehc {

// Spend p (1-p)^j * budget at the j-th channel use after the last arrival.
// budget = min(B_max, E); the allocations over an epoch sum to budget.
struct ConstantFractionEpoch {
  double p;
  double budget;
};

// Spend p * B_t, a fixed fraction of whatever the battery holds.
struct ConstantFractionAdaptive {
  double p;
};

// Spend target when the battery holds at least target, otherwise nothing.
// Callers normally pick target = p * min(B_max, E), the mean arrival rate.
struct Uniform {
  double target;
};

using Policy = std::variant<ConstantFractionEpoch, ConstantFractionAdaptive, Uniform>;

void validate(const Policy& policy);

std::string_view kind_name(const Policy& policy);

// Energy to spend this channel use. epoch_index counts channel uses since the
// most recent positive arrival (0 on the arrival itself). The result never
// exceeds battery.
double allocate(const Policy& policy, double battery, std::int64_t epoch_index);

void to_json(nlohmann::json& j, const Policy& policy);
void from_json(const nlohmann::json& j, Policy& policy);

}  // namespace ehc

#endif  // EHC_POLICIES_HPP
