#ifndef EHC_ENERGY_PROFILES_HPP
#define EHC_ENERGY_PROFILES_HPP

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ehc/rng.hpp"

namespace ehc {

// Energies are normalized by the noise variance, so energy and SNR coincide.

// E with probability p, 0 otherwise.
struct Bernoulli {
  double p;
  double E;
};

// Uniform on [A1, A2].
struct UniformInterval {
  double A1;
  double A2;
};

// A_i with probability p_i; the residual 1 - sum(p_i) sits at 0 and is not stored.
struct KLevel {
  std::vector<double> levels;
  std::vector<double> probs;
};

// P(E >= x) = 1 on x <= 1, 1/x on [1, n), atom of mass 1/n at n.
struct Harmonic {
  std::int64_t n;
};

using EnergyProfile = std::variant<Bernoulli, UniformInterval, KLevel, Harmonic>;

// Throws DomainError when the profile violates its invariants.
void validate(const EnergyProfile& profile);

std::string_view kind_name(const EnergyProfile& profile);

double cdf(const EnergyProfile& profile, double x);

// P(E_t >= x), i.e. 1 - F(x^-).
double survival_left(const EnergyProfile& profile, double x);

double mean(const EnergyProfile& profile);

// Integral of 1 - F(y) over [0, b_max]; the mean of min(E_t, b_max).
double truncated_mean(const EnergyProfile& profile, double b_max);

double sample(const EnergyProfile& profile, Philox4x32& rng);

struct BernoulliReduction {
  double x;
  double p_red;
  double value;
};

// Packet size x in (0, b_max] maximizing x * P(E_t >= x). Discrete profiles
// are scanned over their atoms (clipped to b_max). Continuous profiles use a
// 1024-point grid (log-spaced when the searched range spans more than two
// decades) plus support breakpoints, refined by golden section around the
// best grid point. Near-ties (relative 1e-12) resolve to the smallest x.
BernoulliReduction best_reduction(const EnergyProfile& profile, double b_max);

void to_json(nlohmann::json& j, const EnergyProfile& profile);
void from_json(const nlohmann::json& j, EnergyProfile& profile);

}  // namespace ehc

#endif  // EHC_ENERGY_PROFILES_HPP
