#include "ehc/battery_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "ehc/analytics.hpp"
#include "ehc/errors.hpp"

namespace ehc {

namespace {

// Geometric inter-arrival gaps of a Bernoulli(p) process, by inversion.
class BernoulliArrivals {
public:
  BernoulliArrivals(const Bernoulli& profile, Philox4x32& rng)
      : energy_(profile.E), p_(profile.p), log_q_(std::log1p(-profile.p)), rng_(rng) {
    remaining_ = draw_gap() - 1;
  }

  double operator()() {
    if (remaining_ == 0) {
      remaining_ = draw_gap() - 1;
      return energy_;
    }
    --remaining_;
    return 0.0;
  }

private:
  std::int64_t draw_gap() {
    if (p_ >= 1.0) return 1;
    const double gap = std::floor(std::log(rng_.uniform_open_closed()) / log_q_) + 1.0;
    return gap >= 1e18 ? std::int64_t{1'000'000'000'000'000'000} : static_cast<std::int64_t>(gap);
  }

  double energy_;
  double p_;
  double log_q_;
  Philox4x32& rng_;
  std::int64_t remaining_ = 0;
};

template <typename Source>
TraceStats simulate(Source&& next_arrival, const Policy& policy, double capacity,
                    double initial_level, std::int64_t horizon,
                    std::vector<StepRecord>* records) {
  if (!(std::isfinite(capacity) && capacity >= 0.0)) {
    throw DomainError("simulation: capacity must be finite and >= 0");
  }
  if (!(initial_level >= 0.0 && initial_level <= capacity)) {
    throw DomainError("simulation: initial level must lie in [0, capacity]");
  }
  if (horizon < 1) throw DomainError("simulation: horizon must be >= 1");
  validate(policy);

  TraceStats stats;
  stats.steps = horizon;
  stats.initial_level = initial_level;

  const double first = next_arrival();
  auto current = step({initial_level, capacity}, first, 0.0);
  stats.harvested += first;
  stats.wasted += current.wasted;
  bool started = first > 0.0;
  std::int64_t epoch_index = 0;

  if (records) {
    records->clear();
    records->reserve(static_cast<std::size_t>(horizon));
  }
  for (std::int64_t t = 0; t < horizon; ++t) {
    const double level = current.state.level;
    const double g = started ? allocate(policy, level, epoch_index) : 0.0;
    const double arrival = next_arrival();
    current = step(current.state, arrival, g);
    assert(current.state.level >= 0.0 && current.state.level <= capacity);

    stats.sum_rate += awgn_rate(g);
    stats.allocated += g;
    stats.harvested += arrival;
    stats.wasted += current.wasted;
    if (records) {
      records->push_back({t, started ? epoch_index : -1, level, g, arrival, current.wasted});
    }
    if (arrival > 0.0) {
      started = true;
      epoch_index = 0;
    } else if (started) {
      ++epoch_index;
    }
  }
  stats.final_level = current.state.level;
  stats.avg_rate = stats.sum_rate / static_cast<double>(horizon);
  return stats;
}

}  // namespace

StepResult step(const BatteryState& state, double arrival, double allocation) {
  if (!(arrival >= 0.0) || !std::isfinite(arrival)) {
    throw DomainError("step: arrival must be finite and >= 0");
  }
  if (!(allocation >= 0.0)) throw DomainError("step: allocation must be >= 0");
  if (allocation > state.level) {
    throw FeasibilityError("step: allocation " + std::to_string(allocation) +
                           " exceeds battery level " + std::to_string(state.level));
  }
  const double unclipped = state.level - allocation + arrival;
  StepResult out;
  out.state.capacity = state.capacity;
  out.state.level = std::min(unclipped, state.capacity);
  out.wasted = std::max(unclipped - state.capacity, 0.0);
  return out;
}

TraceStats run_arrivals(std::span<const double> arrivals, const Policy& policy, double capacity,
                        double initial_level, std::vector<StepRecord>* records) {
  if (arrivals.size() < 2) throw DomainError("run_arrivals: need at least two arrivals");
  std::size_t cursor = 0;
  auto source = [&]() { return arrivals[cursor++]; };
  return simulate(source, policy, capacity, initial_level,
                  static_cast<std::int64_t>(arrivals.size()) - 1, records);
}

TraceStats run_trace(const EnergyProfile& profile, const Policy& policy, double capacity,
                     const TraceConfig& config, std::uint64_t substream,
                     std::vector<StepRecord>* records) {
  validate(profile);
  Philox4x32 rng(config.seed, substream);
  if (config.bernoulli_fast_path) {
    if (const auto* bernoulli = std::get_if<Bernoulli>(&profile)) {
      BernoulliArrivals source(*bernoulli, rng);
      return simulate(source, policy, capacity, config.initial_level, config.horizon, records);
    }
  }
  auto source = [&]() { return sample(profile, rng); };
  return simulate(source, policy, capacity, config.initial_level, config.horizon, records);
}

McEstimate monte_carlo(const EnergyProfile& profile, const Policy& policy, double capacity,
                       const TraceConfig& config) {
  if (config.trials < 1) throw DomainError("monte_carlo: trials must be >= 1");
  const auto trials = static_cast<std::size_t>(config.trials);
  std::vector<double> rates(trials);

  unsigned workers = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
  workers = static_cast<unsigned>(std::clamp<std::size_t>(workers, 1, trials));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < trials; i = next++) {
      try {
        rates[i] = run_trace(profile, policy, capacity, config, i).avg_rate;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = trials;
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  // Shifted two-pass moments in trial order: identical trials give exactly
  // zero spread.
  const double shift = rates.front();
  double shifted_sum = 0.0;
  for (double r : rates) shifted_sum += r - shift;
  const double shifted_mean = shifted_sum / static_cast<double>(trials);
  McEstimate estimate;
  estimate.trials = config.trials;
  estimate.mean = shift + shifted_mean;
  if (trials > 1) {
    double squares = 0.0;
    for (double r : rates) {
      const double d = (r - shift) - shifted_mean;
      squares += d * d;
    }
    estimate.std_error = std::sqrt(squares / static_cast<double>(trials - 1) /
                                   static_cast<double>(trials));
  }
  return estimate;
}

}  // namespace ehc
