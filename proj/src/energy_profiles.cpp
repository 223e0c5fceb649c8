#include "ehc/energy_profiles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ehc/detail/overloaded.hpp"
#include "ehc/errors.hpp"
#include "ehc/golden_section.hpp"

namespace ehc {

namespace {

using detail::Overloaded;

constexpr int kGridPoints = 1024;
constexpr double kTieTolerance = 1e-12;

void require(bool ok, const std::string& message) {
  if (!ok) throw DomainError(message);
}

bool finite_non_negative(double v) { return std::isfinite(v) && v >= 0.0; }

double probability_mass(const KLevel& k) {
  return std::accumulate(k.probs.begin(), k.probs.end(), 0.0);
}

struct Candidate {
  double x;
  double value;
};

// Largest value wins; anything within the tie tolerance of it resolves to the
// smallest x.
Candidate pick_best(const std::vector<Candidate>& candidates) {
  double top = 0.0;
  for (const auto& c : candidates) top = std::max(top, c.value);
  const double floor = top - kTieTolerance * (1.0 + top);
  Candidate best{0.0, -1.0};
  for (const auto& c : candidates) {
    if (c.value >= floor && (best.value < 0.0 || c.x < best.x)) best = c;
  }
  return best;
}

template <typename H>
Candidate maximize_continuous(H&& h, double lo, double hi) {
  if (!(hi > lo)) return {hi, h(hi)};
  std::vector<double> grid(kGridPoints);
  const bool log_spaced = lo > 0.0 && hi / lo > 100.0;
  for (int i = 0; i < kGridPoints; ++i) {
    const double t = static_cast<double>(i) / (kGridPoints - 1);
    grid[i] = log_spaced ? lo * std::pow(hi / lo, t) : lo + t * (hi - lo);
  }
  grid.front() = lo;
  grid.back() = hi;

  std::vector<Candidate> candidates;
  candidates.reserve(kGridPoints + 1);
  int best_index = 0;
  for (int i = 0; i < kGridPoints; ++i) {
    candidates.push_back({grid[i], h(grid[i])});
    if (candidates[i].value > candidates[best_index].value) best_index = i;
  }
  const double left = grid[std::max(best_index - 1, 0)];
  const double right = grid[std::min(best_index + 1, kGridPoints - 1)];
  const auto refined = golden_section_maximize(h, left, right, 1e-12 * (1.0 + right));
  if (refined.x > 0.0) candidates.push_back({refined.x, refined.value});
  return pick_best(candidates);
}

}  // namespace

void validate(const EnergyProfile& profile) {
  std::visit(Overloaded{
                 [](const Bernoulli& b) {
                   require(std::isfinite(b.p) && b.p > 0.0 && b.p <= 1.0,
                           "bernoulli: p must lie in (0, 1]");
                   require(finite_non_negative(b.E), "bernoulli: E must be finite and >= 0");
                 },
                 [](const UniformInterval& u) {
                   require(finite_non_negative(u.A1), "uniform: A1 must be finite and >= 0");
                   require(std::isfinite(u.A2) && u.A2 > u.A1, "uniform: A2 must exceed A1");
                 },
                 [](const KLevel& k) {
                   require(!k.levels.empty(), "k_level: at least one level required");
                   require(k.levels.size() == k.probs.size(),
                           "k_level: levels and probs differ in length");
                   for (std::size_t i = 0; i < k.levels.size(); ++i) {
                     require(std::isfinite(k.levels[i]) && k.levels[i] > 0.0,
                             "k_level: levels must be finite and > 0");
                     require(i == 0 || k.levels[i] > k.levels[i - 1],
                             "k_level: levels must be strictly increasing");
                     require(std::isfinite(k.probs[i]) && k.probs[i] > 0.0 && k.probs[i] <= 1.0,
                             "k_level: probs must lie in (0, 1]");
                   }
                   require(probability_mass(k) <= 1.0 + 1e-12, "k_level: probs sum above 1");
                 },
                 [](const Harmonic& h) { require(h.n >= 1, "harmonic: n must be >= 1"); },
             },
             profile);
}

std::string_view kind_name(const EnergyProfile& profile) {
  return std::visit(Overloaded{
                        [](const Bernoulli&) { return std::string_view{"bernoulli"}; },
                        [](const UniformInterval&) { return std::string_view{"uniform"}; },
                        [](const KLevel&) { return std::string_view{"k_level"}; },
                        [](const Harmonic&) { return std::string_view{"harmonic"}; },
                    },
                    profile);
}

double cdf(const EnergyProfile& profile, double x) {
  if (x < 0.0) return 0.0;
  return std::visit(Overloaded{
                        [x](const Bernoulli& b) { return x >= b.E ? 1.0 : 1.0 - b.p; },
                        [x](const UniformInterval& u) {
                          if (x < u.A1) return 0.0;
                          if (x >= u.A2) return 1.0;
                          return (x - u.A1) / (u.A2 - u.A1);
                        },
                        [x](const KLevel& k) {
                          double value = 1.0 - probability_mass(k);
                          for (std::size_t i = 0; i < k.levels.size() && k.levels[i] <= x; ++i) {
                            value += k.probs[i];
                          }
                          return std::clamp(value, 0.0, 1.0);
                        },
                        [x](const Harmonic& h) {
                          const auto n = static_cast<double>(h.n);
                          if (x < 1.0) return 0.0;
                          if (x >= n) return 1.0;
                          return 1.0 - 1.0 / x;
                        },
                    },
                    profile);
}

double survival_left(const EnergyProfile& profile, double x) {
  if (x <= 0.0) return 1.0;
  return std::visit(Overloaded{
                        [x](const Bernoulli& b) { return x <= b.E ? b.p : 0.0; },
                        [x](const UniformInterval& u) {
                          if (x <= u.A1) return 1.0;
                          if (x >= u.A2) return 0.0;
                          return (u.A2 - x) / (u.A2 - u.A1);
                        },
                        [x](const KLevel& k) {
                          double value = 0.0;
                          for (std::size_t i = 0; i < k.levels.size(); ++i) {
                            if (k.levels[i] >= x) value += k.probs[i];
                          }
                          return std::min(value, 1.0);
                        },
                        [x](const Harmonic& h) {
                          if (x <= 1.0) return 1.0;
                          if (x <= static_cast<double>(h.n)) return 1.0 / x;
                          return 0.0;
                        },
                    },
                    profile);
}

double mean(const EnergyProfile& profile) {
  return std::visit(Overloaded{
                        [](const Bernoulli& b) { return b.p * b.E; },
                        [](const UniformInterval& u) { return 0.5 * (u.A1 + u.A2); },
                        [](const KLevel& k) {
                          return std::inner_product(k.levels.begin(), k.levels.end(),
                                                    k.probs.begin(), 0.0);
                        },
                        [](const Harmonic& h) {
                          return 1.0 + std::log(static_cast<double>(h.n));
                        },
                    },
                    profile);
}

double truncated_mean(const EnergyProfile& profile, double b_max) {
  require(b_max >= 0.0 && !std::isnan(b_max), "truncated_mean: b_max must be >= 0");
  return std::visit(Overloaded{
                        [b_max](const Bernoulli& b) { return b.p * std::min(b.E, b_max); },
                        [b_max](const UniformInterval& u) {
                          if (b_max <= u.A1) return b_max;
                          if (b_max >= u.A2) return 0.5 * (u.A1 + u.A2);
                          const double over = b_max - u.A1;
                          return u.A1 + over - over * over / (2.0 * (u.A2 - u.A1));
                        },
                        [b_max](const KLevel& k) {
                          double value = 0.0;
                          for (std::size_t i = 0; i < k.levels.size(); ++i) {
                            value += k.probs[i] * std::min(k.levels[i], b_max);
                          }
                          return value;
                        },
                        [b_max](const Harmonic& h) {
                          const double top = std::min(b_max, static_cast<double>(h.n));
                          return top <= 1.0 ? top : 1.0 + std::log(top);
                        },
                    },
                    profile);
}

double sample(const EnergyProfile& profile, Philox4x32& rng) {
  const double u = rng.uniform_open_closed();
  return std::visit(Overloaded{
                        [u](const Bernoulli& b) { return u <= b.p ? b.E : 0.0; },
                        [u](const UniformInterval& u_) { return u_.A1 + (u_.A2 - u_.A1) * u; },
                        [u](const KLevel& k) {
                          double cumulative = 0.0;
                          for (std::size_t i = 0; i < k.levels.size(); ++i) {
                            cumulative += k.probs[i];
                            if (u <= cumulative) return k.levels[i];
                          }
                          return 0.0;
                        },
                        [u](const Harmonic& h) {
                          return std::min(1.0 / u, static_cast<double>(h.n));
                        },
                    },
                    profile);
}

BernoulliReduction best_reduction(const EnergyProfile& profile, double b_max) {
  require(std::isfinite(b_max) && b_max > 0.0, "best_reduction: b_max must be finite and > 0");
  if (survival_left(profile, std::numeric_limits<double>::min()) <= 0.0) {
    throw DomainError("best_reduction: no positive arrivals");
  }
  const auto h = [&profile](double x) { return x * survival_left(profile, x); };

  auto atoms = [&](const std::vector<double>& levels) {
    std::vector<Candidate> candidates;
    for (double level : levels) {
      const double x = std::min(level, b_max);
      candidates.push_back({x, h(x)});
    }
    return pick_best(candidates);
  };

  const Candidate best = std::visit(
      Overloaded{
          [&](const Bernoulli& b) {
            if (b.E <= 0.0) throw DomainError("best_reduction: no positive arrivals");
            return atoms({b.E});
          },
          [&](const KLevel& k) { return atoms(k.levels); },
          [&](const UniformInterval& u) {
            return maximize_continuous(h, std::min(u.A1, b_max), std::min(u.A2, b_max));
          },
          [&](const Harmonic& hp) {
            return maximize_continuous(h, std::min(1.0, b_max),
                                       std::min(static_cast<double>(hp.n), b_max));
          },
      },
      profile);
  return {best.x, survival_left(profile, best.x), best.value};
}

void to_json(nlohmann::json& j, const EnergyProfile& profile) {
  std::visit(Overloaded{
                 [&j](const Bernoulli& b) { j = {{"kind", "bernoulli"}, {"p", b.p}, {"E", b.E}}; },
                 [&j](const UniformInterval& u) {
                   j = {{"kind", "uniform"}, {"A1", u.A1}, {"A2", u.A2}};
                 },
                 [&j](const KLevel& k) {
                   j = {{"kind", "k_level"}, {"levels", k.levels}, {"probs", k.probs}};
                 },
                 [&j](const Harmonic& h) { j = {{"kind", "harmonic"}, {"n", h.n}}; },
             },
             profile);
}

void from_json(const nlohmann::json& j, EnergyProfile& profile) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "bernoulli") {
      profile = Bernoulli{j.at("p").get<double>(), j.at("E").get<double>()};
    } else if (kind == "uniform") {
      profile = UniformInterval{j.at("A1").get<double>(), j.at("A2").get<double>()};
    } else if (kind == "k_level") {
      profile = KLevel{j.at("levels").get<std::vector<double>>(),
                       j.at("probs").get<std::vector<double>>()};
    } else if (kind == "harmonic") {
      profile = Harmonic{j.at("n").get<std::int64_t>()};
    } else {
      throw ConfigError("unknown profile kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("profile json: ") + e.what());
  }
  validate(profile);
}

}  // namespace ehc
