#include "ehc/policies.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ehc/detail/overloaded.hpp"
#include "ehc/errors.hpp"

namespace ehc {

namespace {

using detail::Overloaded;

bool is_probability(double p) { return std::isfinite(p) && p > 0.0 && p <= 1.0; }

}  // namespace

void validate(const Policy& policy) {
  std::visit(Overloaded{
                 [](const ConstantFractionEpoch& c) {
                   if (!is_probability(c.p)) throw DomainError("policy: p must lie in (0, 1]");
                   if (!(std::isfinite(c.budget) && c.budget >= 0.0)) {
                     throw DomainError("policy: budget must be finite and >= 0");
                   }
                 },
                 [](const ConstantFractionAdaptive& c) {
                   if (!is_probability(c.p)) throw DomainError("policy: p must lie in (0, 1]");
                 },
                 [](const Uniform& u) {
                   if (!(std::isfinite(u.target) && u.target >= 0.0)) {
                     throw DomainError("policy: target must be finite and >= 0");
                   }
                 },
             },
             policy);
}

std::string_view kind_name(const Policy& policy) {
  return std::visit(
      Overloaded{
          [](const ConstantFractionEpoch&) { return std::string_view{"constant_fraction_epoch"}; },
          [](const ConstantFractionAdaptive&) {
            return std::string_view{"constant_fraction_adaptive"};
          },
          [](const Uniform&) { return std::string_view{"uniform"}; },
      },
      policy);
}

double allocate(const Policy& policy, double battery, std::int64_t epoch_index) {
  if (!(battery > 0.0)) return 0.0;
  return std::visit(Overloaded{
                        [=](const ConstantFractionEpoch& c) {
                          const double share =
                              c.p * std::pow(1.0 - c.p, static_cast<double>(epoch_index)) *
                              c.budget;
                          return std::min(share, battery);
                        },
                        [=](const ConstantFractionAdaptive& c) { return c.p * battery; },
                        [=](const Uniform& u) { return battery >= u.target ? u.target : 0.0; },
                    },
                    policy);
}

void to_json(nlohmann::json& j, const Policy& policy) {
  std::visit(Overloaded{
                 [&j](const ConstantFractionEpoch& c) {
                   j = {{"kind", "constant_fraction_epoch"}, {"p", c.p}, {"budget", c.budget}};
                 },
                 [&j](const ConstantFractionAdaptive& c) {
                   j = {{"kind", "constant_fraction_adaptive"}, {"p", c.p}};
                 },
                 [&j](const Uniform& u) { j = {{"kind", "uniform"}, {"target", u.target}}; },
             },
             policy);
}

void from_json(const nlohmann::json& j, Policy& policy) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "constant_fraction_epoch") {
      policy = ConstantFractionEpoch{j.at("p").get<double>(), j.at("budget").get<double>()};
    } else if (kind == "constant_fraction_adaptive") {
      policy = ConstantFractionAdaptive{j.at("p").get<double>()};
    } else if (kind == "uniform") {
      policy = Uniform{j.at("target").get<double>()};
    } else {
      throw ConfigError("unknown policy kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("policy json: ") + e.what());
  }
  validate(policy);
}

}  // namespace ehc
