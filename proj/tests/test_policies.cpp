#include <doctest.h>

#include <cmath>

#include "ehc/errors.hpp"
#include "ehc/policies.hpp"

using namespace ehc;

TEST_CASE("constant fraction epoch allocates p (1-p)^j budget") {
  const Policy policy = ConstantFractionEpoch{0.2, 10.0};
  CHECK(allocate(policy, 10.0, 0) == doctest::Approx(2.0));
  CHECK(allocate(policy, 10.0, 1) == doctest::Approx(1.6));
  CHECK(allocate(policy, 10.0, 2) == doctest::Approx(1.28));
}

TEST_CASE("constant fraction epoch clamps to the battery") {
  const Policy policy = ConstantFractionEpoch{0.5, 10.0};
  CHECK(allocate(policy, 1.0, 0) == 1.0);
  CHECK(allocate(policy, 0.0, 0) == 0.0);
}

TEST_CASE("epoch allocations sum to the budget") {
  for (double p : {0.01, 0.2, 0.5, 0.99, 1.0}) {
    const Policy policy = ConstantFractionEpoch{p, 7.0};
    double total = 0.0;
    for (std::int64_t j = 0; j < 20000; ++j) total += allocate(policy, 1e9, j);
    CHECK(total == doctest::Approx(7.0).epsilon(1e-9));
  }
}

TEST_CASE("epoch policy starting from a full battery never needs the clamp") {
  // Remaining energy after j uses is (1-p)^j budget >= p (1-p)^j budget.
  for (double p : {0.05, 0.2, 0.75}) {
    const Policy policy = ConstantFractionEpoch{p, 10.0};
    double battery = 10.0;
    // stop well before the remaining energy drowns in rounding of 10.0
    for (std::int64_t j = 0;; ++j) {
      const double unclamped = p * std::pow(1.0 - p, static_cast<double>(j)) * 10.0;
      if (unclamped < 1e-9) break;
      const double g = allocate(policy, battery, j);
      CHECK(g == doctest::Approx(unclamped).epsilon(1e-9).scale(1e-300));
      battery -= g;
    }
  }
}

TEST_CASE("adaptive and uniform") {
  CHECK(allocate(ConstantFractionAdaptive{0.5}, 8.0, 123) == 4.0);
  CHECK(allocate(Uniform{2.0}, 1.9, 0) == 0.0);
  CHECK(allocate(Uniform{2.0}, 2.0, 0) == 2.0);
  CHECK(allocate(Uniform{2.0}, 5.0, 17) == 2.0);
}

TEST_CASE("allocations are feasible for arbitrary battery levels") {
  const Policy policies[] = {ConstantFractionEpoch{0.3, 50.0}, ConstantFractionAdaptive{0.9},
                             Uniform{3.0}};
  for (const auto& policy : policies) {
    for (double battery : {0.0, 1e-12, 0.5, 3.0, 49.0, 1e6}) {
      for (std::int64_t j : {0, 1, 5, 1000}) {
        const double g = allocate(policy, battery, j);
        CHECK(g >= 0.0);
        CHECK(g <= battery);
      }
    }
  }
}

TEST_CASE("policy JSON uses the documented shapes") {
  using nlohmann::json;
  CHECK(json(Policy{ConstantFractionEpoch{0.2, 10.0}}) ==
        json::parse(R"({"kind":"constant_fraction_epoch","p":0.2,"budget":10.0})"));
  CHECK(json(Policy{ConstantFractionAdaptive{0.2}}) ==
        json::parse(R"({"kind":"constant_fraction_adaptive","p":0.2})"));
  CHECK(json(Policy{Uniform{2.0}}) == json::parse(R"({"kind":"uniform","target":2.0})"));
  const auto parsed = json::parse(R"({"kind":"uniform","target":2.5})").get<Policy>();
  CHECK(std::get<Uniform>(parsed).target == 2.5);
  CHECK_THROWS_AS(json::parse(R"({"kind":"greedy"})").get<Policy>(), ConfigError);
  CHECK_THROWS_AS(json::parse(R"({"kind":"constant_fraction_adaptive","p":0})").get<Policy>(),
                  DomainError);
}
