#pragma once

#include <array>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "sigdet/belief.hpp"
#include "sigdet/dynamics.hpp"
#include "sigdet/error.hpp"
#include "sigdet/history.hpp"
#include "sigdet/model.hpp"
#include "sigdet/strategy.hpp"

namespace sigdet {

/// Turns a mixed profile into history tables. Threshold rules are resolved
/// time step by time step: the beliefs at t only depend on everyone's
/// decisions before t, which are already tabulated when t is processed.
/// Histories of probability zero keep the table default.
inline TabularProfile compile_profile(const Scenario& scenario, const StrategyProfile& profile) {
  const int n = scenario.sensor_count();
  if (static_cast<int>(profile.size()) != n) {
    throw Error(ErrorKind::kParameterOutOfRange, "profile must hold one strategy per sensor");
  }
  TabularProfile out;
  std::vector<int> threshold_sensors;
  for (int j = 0; j < n; ++j) {
    if (const auto* table = std::get_if<TabularStrategy>(&profile[j])) {
      out.push_back(*table);
    } else {
      const auto& rule = std::get<ThresholdStrategy>(profile[j]);
      if (rule.horizon() != scenario.horizon() || rule.message_alphabet() != scenario.message_alphabet()) {
        throw Error(ErrorKind::kParameterOutOfRange, "threshold rule of sensor " + std::to_string(j + 1) +
                                                         " does not match the scenario horizon or alphabet");
      }
      out.emplace_back(history_shape(scenario, j));
      threshold_sensors.push_back(j);
    }
  }
  check_profile(scenario, out);

  for (int t = 1; t <= scenario.horizon(); ++t) {
    for (int j : threshold_sensors) {
      const auto& rule = std::get<ThresholdStrategy>(profile[j]);
      const SystemMap map(scenario, out, j, t - 1);
      const HistoryShape& shape = out[j].shape();
      std::map<std::vector<int>, std::array<double, 2>> mass_cache;
      for (std::uint64_t code = 0; code < shape.code_space(t); ++code) {
        const PrivateHistory history = shape.decode(j, t, code);
        const auto key = message_history_key(history.messages);
        auto it = mass_cache.find(key);
        if (it == mass_cache.end()) it = mass_cache.emplace(key, map.compatible_mass(history.messages)).first;
        std::array<double, 2> joint{};
        for (int h = 0; h < 2; ++h) {
          double w = scenario.prior_of(h) * it->second[h];
          for (int s = 1; s <= t; ++s) w *= scenario.observations().prob(j, s, h, history.observations[s - 1]);
          joint[h] = w;
        }
        const double z = joint[0] + joint[1];
        if (!(z > 0.0)) continue;
        out[j].set(t, code, rule.decide(t, history.messages, joint[0] / z));
      }
    }
  }
  return out;
}

inline TabularProfile compile_profile(const Scenario& scenario, const TabularProfile& profile) {
  check_profile(scenario, profile);
  return profile;
}

/// Decision of one sensor at a given private history. Threshold rules need the
/// posterior, which depends on the other sensors' rules.
inline Decision decide(const Scenario& scenario, const StrategyProfile& profile, const PrivateHistory& history) {
  const Strategy& strategy = profile.at(history.sensor);
  if (const auto* table = std::get_if<TabularStrategy>(&strategy)) return table->decide(history);
  const TabularProfile compiled = compile_profile(scenario, profile);
  const double pi = posterior_from_history(scenario, compiled, history);
  return std::get<ThresholdStrategy>(strategy).decide(history.time(), history.messages, pi);
}

inline StoppingOutcome rollout(const Scenario& scenario, const StrategyProfile& profile, const JointObservations& obs,
                               RolloutTrace* trace = nullptr) {
  return rollout(scenario, compile_profile(scenario, profile), obs, trace);
}

inline StrategyProfile as_strategy_profile(const TabularProfile& profile) {
  return StrategyProfile(profile.begin(), profile.end());
}

// ---------------------------------------------------------------------------
// Counterexample presets. Sensor 0 has the binary observations, sensor 1 the
// ternary ones; each hears the other.

enum class Preset { kEx1, kEx2, kNonThreshold };

inline Preset parse_preset(const std::string& name) {
  if (name == "ex1") return Preset::kEx1;
  if (name == "ex2") return Preset::kEx2;
  if (name == "non_threshold" || name == "non-threshold" || name == "non_th") return Preset::kNonThreshold;
  throw Error(ErrorKind::kConfig, "unknown preset profile '" + name + "' (expected ex1, ex2 or non_threshold)");
}

inline std::string preset_name(Preset preset) {
  switch (preset) {
    case Preset::kEx1:
      return "ex1";
    case Preset::kEx2:
      return "ex2";
    case Preset::kNonThreshold:
      return "non_threshold";
  }
  return "";
}

inline bool is_counterexample_shape(const Scenario& scenario) {
  return scenario.sensor_count() == 2 && scenario.horizon() == 3 && scenario.message_alphabet() == 2 &&
         scenario.observations().alphabet_size(0) == 2 && scenario.observations().alphabet_size(1) == 3 &&
         scenario.graph().edges() == std::vector<std::pair<int, int>>{{0, 1}, {1, 0}};
}

inline StrategyProfile preset_strategies(Preset preset, const Scenario& scenario) {
  if (!is_counterexample_shape(scenario)) {
    throw Error(ErrorKind::kWrongScenario, "preset profiles need the two-sensor, three-step counterexample layout");
  }
  using Off = ThresholdStrategy::OffPath;
  const auto b = Decision::blank();
  const auto zero = Decision::stop(0);
  const auto one = Decision::stop(1);
  const auto all = Interval{0.0, 1.0};
  const ThresholdRule keep_going{};

  // Sensor 0 listens at t = 1, reacts to sensor 1's first message at t = 2,
  // and at t = 3 reads H off its noiseless observation.
  ThresholdStrategy listener(3, 2, Off::kStopZero);
  listener.set_default_rule(1, keep_going);
  listener.set_default_rule(3, ThresholdRule::binary(Interval{0.0, 0.5}, Interval{0.5, 1.0}));

  // Sensor 1 acts on its t = 1 belief, which is 0, 1/2 or 1.
  ThresholdStrategy talker(3, 2, Off::kStopZero);
  talker.set_default_rule(2, ThresholdRule::binary(std::nullopt, all));
  talker.set_default_rule(3, ThresholdRule::binary(std::nullopt, all));

  switch (preset) {
    case Preset::kEx1:
      // Certain beliefs are announced, an uncertain one waits.
      talker.set_default_rule(1, ThresholdRule::binary(Interval{0.0, 0.0}, Interval{1.0, 1.0}));
      listener.set_rule(2, {{zero}}, ThresholdRule::binary(std::nullopt, all));
      listener.set_rule(2, {{one}}, ThresholdRule::binary(all, std::nullopt));
      listener.set_rule(2, {{b}}, keep_going);
      break;
    case Preset::kEx2:
      // Stop at once: 0 only when certain of H=0.
      talker.set_default_rule(1, ThresholdRule::binary(Interval{0.0, 1.0 - 1e-6}, Interval{1.0, 1.0}));
      listener.set_rule(2, {{zero}}, ThresholdRule::binary(std::nullopt, all));
      listener.set_default_rule(2, keep_going);
      break;
    case Preset::kNonThreshold:
      // Blank now signals certainty about H=0; uncertainty stops with 0.
      talker.set_default_rule(1, ThresholdRule::binary(Interval{0.0, 0.0}, Interval{1e-6, 1.0 - 1e-6}));
      listener.set_rule(2, {{one}}, ThresholdRule::binary(all, std::nullopt));
      listener.set_rule(2, {{b}}, ThresholdRule::binary(std::nullopt, all));
      listener.set_rule(2, {{zero}}, keep_going);
      break;
  }
  return {listener, talker};
}

inline StrategyProfile preset_strategies(const std::string& name, const Scenario& scenario) {
  return preset_strategies(parse_preset(name), scenario);
}

/// Closed-form expected costs of the three presets.
struct CounterexampleCosts {
  double ex1 = 0.0;
  double ex2 = 0.0;
  double non_threshold = 0.0;
};

inline CounterexampleCosts counterexample_closed_forms(double K, double r1) {
  return {K + r1 + (1.0 - r1) * (K + 1.0), K + 2.0 - r1 / 2.0, K + 2.0 * (1.0 - r1) + r1 * (K + 1.0) / 2.0};
}

}  // namespace sigdet
