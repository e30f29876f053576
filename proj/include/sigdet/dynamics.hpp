#pragma once

#include <cstdint>
#include <vector>

#include "sigdet/decision.hpp"
#include "sigdet/error.hpp"
#include "sigdet/history.hpp"
#include "sigdet/model.hpp"
#include "sigdet/strategy.hpp"

namespace sigdet {

/// obs[sensor][t-1]: every sensor's observation sequence.
using JointObservations = std::vector<std::vector<int>>;

/// Decisions emitted at every step: decisions[t-1][sensor]. Stopped sensors emit blank.
struct RolloutTrace {
  std::vector<std::vector<Decision>> decisions;
};

/// Per-sensor private-history encoders, precomputed once per scenario.
class Dynamics {
 public:
  explicit Dynamics(const Scenario& scenario) : scenario_(&scenario) {
    const int n = scenario.sensor_count();
    for (int j = 0; j < n; ++j) shapes_.push_back(history_shape(scenario, j));
  }

  const Scenario& scenario() const { return *scenario_; }
  const HistoryShape& shape(int sensor) const { return shapes_[sensor]; }

  /// Runs the message-passing dynamics for steps 1..depth. `decide(sensor, t, code)`
  /// supplies each active sensor's decision from its history code. Sensors that
  /// have not stopped by `depth` get stop_time 0 in the returned outcome.
  template <class Decide>
  StoppingOutcome run(Decide&& decide, const JointObservations& obs, int depth, RolloutTrace* trace = nullptr) const {
    const int n = scenario_->sensor_count();
    const int radix = scenario_->message_alphabet() + 1;
    StoppingOutcome outcome(n);
    std::vector<std::uint64_t> codes(n, 0);
    std::vector<Decision> previous(n), current(n);
    if (trace != nullptr) trace->decisions.clear();
    for (int t = 1; t <= depth; ++t) {
      for (int j = 0; j < n; ++j) {
        outcome[j].sensor = j;
        if (outcome[j].stop_time != 0) {
          current[j] = Decision::blank();
          continue;
        }
        std::uint64_t code = codes[j];
        if (t > 1) {
          for (int p : scenario_->graph().predecessors(j)) code = code * radix + previous[p].digit();
        }
        code = shapes_[j].push_observation(code, obs[j][t - 1]);
        codes[j] = code;
        const Decision d = decide(j, t, code);
        current[j] = d;
        if (d.is_stop()) {
          outcome[j].stop_time = t;
          outcome[j].decision = d;
        }
      }
      if (trace != nullptr) trace->decisions.push_back(current);
      std::swap(previous, current);
    }
    return outcome;
  }

 private:
  const Scenario* scenario_;
  std::vector<HistoryShape> shapes_;
};

inline void check_observations(const Scenario& scenario, const JointObservations& obs) {
  if (static_cast<int>(obs.size()) != scenario.sensor_count()) {
    throw Error(ErrorKind::kParameterOutOfRange, "joint observations must list every sensor");
  }
  for (int j = 0; j < scenario.sensor_count(); ++j) {
    if (static_cast<int>(obs[j].size()) != scenario.horizon()) {
      throw Error(ErrorKind::kParameterOutOfRange, "observation sequence of sensor " + std::to_string(j + 1) +
                                                       " must have length T");
    }
    for (int y : obs[j]) {
      if (y < 0 || y >= scenario.observations().alphabet_size(j)) {
        throw Error(ErrorKind::kParameterOutOfRange, "observation symbol out of range");
      }
    }
  }
}

inline void check_profile(const Scenario& scenario, const TabularProfile& profile) {
  if (static_cast<int>(profile.size()) != scenario.sensor_count()) {
    throw Error(ErrorKind::kParameterOutOfRange, "profile must hold one strategy per sensor");
  }
  for (int j = 0; j < scenario.sensor_count(); ++j) {
    const auto& a = profile[j].shape();
    const auto b = history_shape(scenario, j);
    if (a.horizon() != b.horizon() || a.alphabet() != b.alphabet() || a.predecessors() != b.predecessors() ||
        a.message_alphabet() != b.message_alphabet()) {
      throw Error(ErrorKind::kParameterOutOfRange, "strategy of sensor " + std::to_string(j + 1) +
                                                       " does not match the scenario");
    }
  }
}

/// Full trajectory under a tabular profile.
inline StoppingOutcome rollout(const Scenario& scenario, const TabularProfile& profile, const JointObservations& obs,
                               RolloutTrace* trace = nullptr) {
  check_profile(scenario, profile);
  check_observations(scenario, obs);
  Dynamics dynamics(scenario);
  return dynamics.run([&](int j, int t, std::uint64_t code) { return profile[j].decide(t, code); }, obs,
                      scenario.horizon(), trace);
}

}  // namespace sigdet
