#ifndef EHC_BATTERY_SIM_HPP
#define EHC_BATTERY_SIM_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "ehc/energy_profiles.hpp"
#include "ehc/policies.hpp"
#include "ehc/rng.hpp"

namespace ehc {

struct BatteryState {
  double level = 0.0;
  double capacity = 0.0;
};

struct StepResult {
  BatteryState state;
  double wasted = 0.0;
};

// Spend allocation from the battery, then credit arrival, discarding whatever
// overflows capacity. Throws FeasibilityError when allocation > level.
StepResult step(const BatteryState& state, double arrival, double allocation);

struct TraceConfig {
  std::int64_t horizon = 1;
  std::uint64_t seed = 0;
  std::int64_t trials = 1;
  double initial_level = 0.0;
  // Worker threads for monte_carlo; 0 picks the hardware concurrency. Results
  // do not depend on this value.
  unsigned threads = 0;
  // Bernoulli profiles draw geometric inter-arrival gaps instead of one
  // Bernoulli variate per step. Same law, different random stream.
  bool bernoulli_fast_path = true;
};

struct TraceStats {
  std::int64_t steps = 0;
  double sum_rate = 0.0;
  double avg_rate = 0.0;
  double harvested = 0.0;
  double allocated = 0.0;
  double wasted = 0.0;
  double initial_level = 0.0;
  double final_level = 0.0;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t trials = 0;
};

// One channel use as seen by the simulator: the battery before spending, the
// allocation, the arrival credited afterwards and what overflowed.
struct StepRecord {
  std::int64_t t;
  std::int64_t epoch_index;  // -1 before the first positive arrival
  double level;
  double allocation;
  double arrival;
  double wasted;
};

// Replays an explicit arrival sequence E_0..E_N (horizon N = size - 1). E_0
// credits the battery before the first channel use.
TraceStats run_arrivals(std::span<const double> arrivals, const Policy& policy, double capacity,
                        double initial_level = 0.0, std::vector<StepRecord>* records = nullptr);

// A single trial on random sub-stream `substream` of config.seed.
TraceStats run_trace(const EnergyProfile& profile, const Policy& policy, double capacity,
                     const TraceConfig& config, std::uint64_t substream = 0,
                     std::vector<StepRecord>* records = nullptr);

// Mean and standard error of avg_rate over config.trials independent trials;
// trial i runs on sub-stream i. Bit-identical for any thread count.
McEstimate monte_carlo(const EnergyProfile& profile, const Policy& policy, double capacity,
                       const TraceConfig& config);

}  // namespace ehc

#endif  // EHC_BATTERY_SIM_HPP
