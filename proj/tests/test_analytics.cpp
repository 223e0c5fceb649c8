#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ehc/analytics.hpp"
#include "ehc/errors.hpp"

using namespace ehc;

namespace {

// Plain forward summation of the first n terms in long double.
double brute_series(double p, double budget, int n) {
  long double sum = 0.0L;
  long double share = p;
  for (int j = 0; j < n; ++j) {
    sum += share * 0.5L * std::log2(1.0L + share * budget);
    share *= 1.0L - p;
  }
  return static_cast<double>(sum);
}

}  // namespace

TEST_CASE("awgn rate and entropy") {
  CHECK(awgn_rate(0.0) == 0.0);
  CHECK(awgn_rate(3.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(awgn_rate(1e-20) > 0.0);
  CHECK_THROWS_AS(awgn_rate(-1.0), DomainError);
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0));
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  // mpmath, 30 digits
  CHECK(binary_entropy(0.11) == doctest::Approx(0.499915958164528).epsilon(1e-13));
}

TEST_CASE("policy series against independent evaluations") {
  // mpmath reference at 50 digits
  CHECK(policy_rate_series(0.2, 10.0) == doctest::Approx(0.50287586360158733).epsilon(1e-11));
  CHECK(policy_rate_series(0.5, 1000.0) == doctest::Approx(3.9907616678714777).epsilon(1e-11));
  for (double p : {0.01, 0.2, 0.5, 0.9}) {
    for (double b : {0.1, 3.0, 1e4}) {
      CHECK(policy_rate_series(p, b) == doctest::Approx(brute_series(p, b, 1'000'000)).epsilon(1e-11));
    }
  }
  CHECK(policy_rate_series(1.0, 3.0) == doctest::Approx(1.0));
  CHECK(policy_rate_series(0.3, 0.0) == 0.0);
}

TEST_CASE("series error scales with tol") {
  const double exact = policy_rate_series(0.05, 100.0, 1e-15);
  for (double tol : {1e-4, 1e-6, 1e-8}) {
    CHECK(std::abs(policy_rate_series(0.05, 100.0, tol) - exact) <= tol);
  }
}

TEST_CASE("capacity lower bound at p=1/2, B=E=1000") {
  const double expected = 3.9907616678714777 - 1.04 - 1.0;
  CHECK(capacity_lower_bound(0.5, 1000.0, 1000.0) == doctest::Approx(expected).epsilon(1e-11));
  const auto r = bernoulli_report(0.5, 1000.0, 1000.0);
  CHECK(r.gap == doctest::Approx(upper_bound(0.5, 1000.0, 1000.0) - expected));
  CHECK(r.gap <= constants::kCapacityGap);
}

TEST_CASE("ozarow-wyner term uses the rounded loss") {
  CHECK(ozarow_wyner_lb(0.0) == -1.04);
  CHECK(ozarow_wyner_lb(3.0) == doctest::Approx(-0.04));
  // the exact loss 0.5 log2(3) + 0.5 log2(pi e / 6) rounds to 1.04
  const double exact = 0.5 * std::log2(3.0) +
                       0.5 * std::log2(std::numbers::pi * std::numbers::e / 6.0);
  CHECK(exact == doctest::Approx(1.0470956).epsilon(1e-7));
  CHECK(side_information_penalty(0.5) == doctest::Approx(2.04));
}

TEST_CASE("lower bound clamps at zero for small budgets") {
  CHECK(capacity_lower_bound(0.5, 1.0, 1.0) == 0.0);
  CHECK(capacity_lower_bound(0.01, 1e6, 1e6) >= 0.0);
}

TEST_CASE("policy gap and capacity sandwich over a parameter grid") {
  for (int i = 1; i <= 99; i += 7) {
    const double p = i / 100.0;
    for (double pb = 1e-2; pb <= 1e6; pb *= 3.7) {
      const double b = pb / p;
      const double up = upper_bound(p, b, b);
      const double series = policy_rate_series(p, b);
      const double lo = capacity_lower_bound(p, b, b);
      INFO("p=" << p << " pB=" << pb);
      CHECK(series <= up + 1e-12);
      CHECK(up - series <= constants::kPolicyGap);
      CHECK(lo <= series);
      CHECK(up - lo <= constants::kCapacityGap);
    }
  }
}

TEST_CASE("upper bound is symmetric in B_max and E") {
  CHECK(upper_bound(0.3, 5.0, 9.0) == upper_bound(0.3, 9.0, 5.0));
  CHECK(capacity_lower_bound(0.3, 50.0, 90.0) == capacity_lower_bound(0.3, 90.0, 50.0));
}

TEST_CASE("series sits below the upper bound by concavity") {
  for (double p : {0.1, 0.6}) {
    for (double b : {0.5, 20.0, 5000.0}) CHECK(policy_rate_series(p, b) < upper_bound(p, b, b));
  }
}

TEST_CASE("uniform arrivals table") {
  auto r = uniform_profile_report(2.0, 6.0, 10.0);
  CHECK(r.regime == UniformRegime::Saturated);
  CHECK(r.approx_capacity == doctest::Approx(0.5 * std::log2(5.0)));
  CHECK(r.gap_bound == 3.08);

  r = uniform_profile_report(2.0, 6.0, 3.0);
  CHECK(r.regime == UniformRegime::BatteryLimited);
  CHECK(r.approx_capacity == doctest::Approx(1.0));
  CHECK(r.gap_bound == 3.08);

  r = uniform_profile_report(2.0, 6.0, 1.0);
  CHECK(r.regime == UniformRegime::DegenerateBernoulli);
  CHECK(r.approx_capacity == doctest::Approx(0.5));
  CHECK(r.gap_bound == 2.58);
}

TEST_CASE("uniform arrivals: general bounds stay inside the table guarantee") {
  for (double b : {1.0, 2.5, 3.0, 4.0, 5.5, 10.0}) {
    const auto table = uniform_profile_report(2.0, 6.0, b);
    const auto g = general_bounds(UniformInterval{2.0, 6.0}, b);
    INFO("b=" << b);
    CHECK(g.gap <= table.gap_bound + 1e-12);
    CHECK(g.upper == doctest::Approx(awgn_rate(truncated_mean(UniformInterval{2.0, 6.0}, b))));
  }
}

TEST_CASE("harmonic arrivals") {
  // reduction value 1 for every x in [1, n], truncated mean 1 + ln n
  for (std::int64_t n : {2, 10, 100, 10000}) {
    const double expected = 0.5 * std::log2((2.0 + std::log(double(n))) / 2.0) + 2.58;
    CHECK(gap_bound_ratio(Harmonic{n}, 1e9) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(area_ratio(Harmonic{n}, 1e9) == doctest::Approx(1.0 + std::log(double(n))));
  }
  // ln n = 2 gives 3.08 in closed form; integer n brackets it.
  CHECK(0.5 * std::log2((2.0 + 2.0) / 2.0) + 2.58 == doctest::Approx(3.08));
  CHECK(gap_bound_ratio(Harmonic{7}, 1e9) < 3.08);
  CHECK(gap_bound_ratio(Harmonic{8}, 1e9) > 3.08);
}

TEST_CASE("k-level area ratio is at most k") {
  const KLevel two{{1.0, 3.0}, {0.5, 0.2}};
  const KLevel four{{0.5, 1.0, 2.0, 8.0}, {0.3, 0.2, 0.2, 0.1}};
  for (double b : {0.7, 2.0, 100.0}) {
    CHECK(area_ratio(two, b) >= 1.0);
    CHECK(area_ratio(two, b) <= 2.0 + 1e-12);
    CHECK(area_ratio(four, b) <= 4.0 + 1e-12);
    CHECK(general_bounds(two, b).gap <= gap_bound_ratio(two, b) + 1e-9);
    CHECK(gap_bound_ratio(two, b) <= 0.5 * std::log2(2.0) + 2.58 + 1e-12);
  }
}

TEST_CASE("Bernoulli profile reduces to itself") {
  const auto g = general_bounds(Bernoulli{0.3, 40.0}, 100.0);
  CHECK(g.upper == doctest::Approx(upper_bound(0.3, 100.0, 40.0)));
  CHECK(*g.achieved_series == doctest::Approx(policy_rate_series(0.3, 40.0)));
  CHECK(gap_bound_ratio(Bernoulli{0.3, 40.0}, 100.0) == doctest::Approx(2.58));
}

TEST_CASE("constants behind the gap proofs") {
  const auto c = proof_constants();
  CHECK(c.policy_threshold_rate == doctest::Approx(0.97299109).epsilon(1e-7));
  CHECK(c.policy_threshold_rate <= 0.973);
  CHECK(c.fraction_penalty_small_p == doctest::Approx(0.72134716).epsilon(1e-7));
  CHECK(c.fraction_penalty_limit == doctest::Approx(0.72134752).epsilon(1e-7));
  CHECK(c.capacity_penalty_max == doctest::Approx(1.5242).epsilon(1e-4));
  CHECK(c.capacity_penalty_argmax == doctest::Approx(0.41313).epsilon(1e-3));
  CHECK(c.capacity_threshold_rate == doctest::Approx(2.5799357).epsilon(1e-7));
  CHECK(c.capacity_threshold_rate <= 2.58);
  CHECK(c.policy_threshold_slack + 0.25 < 0.973);
}

TEST_CASE("fraction penalty decreases towards 1/(2 ln 2)") {
  double prev = fraction_penalty(0.999);
  for (double p = 0.9; p > 1e-6; p /= 2.0) {
    const double cur = fraction_penalty(p);
    CHECK(cur > prev);
    prev = cur;
  }
  CHECK_THROWS_AS(fraction_penalty(0.0), DomainError);
}

TEST_CASE("bounds report JSON fields") {
  const nlohmann::json j = bernoulli_report(0.5, 1000.0, 1000.0);
  CHECK(j.contains("upper_bits"));
  CHECK(j.contains("lower_bits"));
  CHECK(j.contains("series_bits"));
  CHECK(j.contains("gap_bits"));
  CHECK(j.size() == 4);
}

TEST_CASE("analytic domain errors") {
  CHECK_THROWS_AS(policy_rate_series(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(policy_rate_series(1.5, 1.0), DomainError);
  CHECK_THROWS_AS(upper_bound(0.5, -1.0, 1.0), DomainError);
  CHECK_THROWS_AS(uniform_profile_report(3.0, 2.0, 1.0), DomainError);
}
