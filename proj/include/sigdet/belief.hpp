#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "sigdet/decision.hpp"
#include "sigdet/dynamics.hpp"
#include "sigdet/error.hpp"
#include "sigdet/history.hpp"
#include "sigdet/model.hpp"
#include "sigdet/numeric.hpp"
#include "sigdet/strategy.hpp"

namespace sigdet {

/// One Bayes step on P(H=0): pi' = f0 pi / (f0 pi + f1 (1 - pi)).
inline double bayes_step(double pi, double pmf0, double pmf1) {
  const double num = pmf0 * pi;
  const double den = num + pmf1 * (1.0 - pi);
  if (!(den > 0.0)) throw Error(ErrorKind::kZeroLikelihood, "observation has zero likelihood under the current belief");
  return num / den;
}

/// Deterministic map from the other sensors' observation trajectories to the
/// messages sensor i receives, assuming i itself stays blank. Trajectories of
/// probability zero under both hypotheses are dropped.
///
/// Holds a reference to the scenario, which must outlive the map.
class SystemMap {
 public:
  struct Trajectory {
    /// Observations of the other sensors, others-major: obs[k * depth + s - 1].
    std::vector<int> obs;
    std::array<double, 2> prob{};
    /// Messages to sensor i at steps 1..depth, one mixed-radix code per step.
    std::vector<std::uint64_t> steps;
  };

  SystemMap(const Scenario& scenario, const TabularProfile& profile, int sensor, int depth,
            std::uint64_t budget = default_budget())
      : scenario_(&scenario), sensor_(sensor), depth_(depth) {
    check_profile(scenario, profile);
    const int n = scenario.sensor_count();
    if (sensor < 0 || sensor >= n) throw Error(ErrorKind::kParameterOutOfRange, "sensor index out of range");
    if (depth < 0 || depth > scenario.horizon()) throw Error(ErrorKind::kParameterOutOfRange, "depth outside 0..T");
    for (int j = 0; j < n; ++j) {
      if (j != sensor) others_.push_back(j);
    }
    predecessors_ = scenario.graph().predecessors(sensor);

    // Odometer over (other sensor, step) digits.
    std::vector<int> radix;
    std::uint64_t count = 1;
    for (int j : others_) {
      for (int s = 0; s < depth; ++s) {
        radix.push_back(scenario.observations().alphabet_size(j));
        if (count > budget / static_cast<std::uint64_t>(radix.back())) {
          throw Error(ErrorKind::kBudgetExceeded, "other sensors' trajectory space exceeds the enumeration budget");
        }
        count *= static_cast<std::uint64_t>(radix.back());
      }
    }

    Dynamics dynamics(scenario);
    JointObservations obs(n, std::vector<int>(scenario.horizon(), 0));
    std::vector<int> digits(radix.size(), 0);
    RolloutTrace trace;
    const int message_radix = scenario.message_alphabet() + 1;
    while (true) {
      std::array<double, 2> prob{1.0, 1.0};
      for (std::size_t k = 0; k < others_.size(); ++k) {
        for (int s = 1; s <= depth; ++s) {
          const int y = digits[k * depth + s - 1];
          obs[others_[k]][s - 1] = y;
          for (int h = 0; h < 2; ++h) prob[h] *= scenario.observations().prob(others_[k], s, h, y);
        }
      }
      if (prob[0] > 0.0 || prob[1] > 0.0) {
        dynamics.run(
            [&](int j, int t, std::uint64_t code) {
              return j == sensor ? Decision::blank() : profile[j].decide(t, code);
            },
            obs, depth, &trace);
        Trajectory traj{digits, prob, {}};
        for (int s = 1; s <= depth; ++s) {
          std::uint64_t step = 0;
          for (int p : predecessors_) step = step * message_radix + trace.decisions[s - 1][p].digit();
          traj.steps.push_back(step);
        }
        trajectories_.push_back(std::move(traj));
      }
      std::size_t pos = digits.size();
      while (pos > 0 && ++digits[pos - 1] == radix[pos - 1]) digits[--pos] = 0;
      if (pos == 0) break;
    }
  }

  const Scenario& scenario() const { return *scenario_; }
  int sensor() const { return sensor_; }
  int depth() const { return depth_; }
  const std::vector<int>& others() const { return others_; }
  const std::vector<int>& predecessors() const { return predecessors_; }
  const std::vector<Trajectory>& trajectories() const { return trajectories_; }
  std::size_t size() const { return trajectories_.size(); }

  std::uint64_t step_code(const MessageVector& messages) const {
    if (messages.size() != predecessors_.size()) {
      throw Error(ErrorKind::kParameterOutOfRange, "message step must have one entry per predecessor");
    }
    std::uint64_t code = 0;
    for (Decision d : messages) code = code * (scenario_->message_alphabet() + 1) + d.digit();
    return code;
  }
  MessageVector decode_step(std::uint64_t code) const {
    const int radix = scenario_->message_alphabet() + 1;
    MessageVector out(predecessors_.size());
    for (std::size_t k = predecessors_.size(); k-- > 0;) {
      out[k] = Decision::from_digit(static_cast<int>(code % radix));
      code /= radix;
    }
    return out;
  }
  std::vector<std::uint64_t> step_codes(const MessageHistory& history) const {
    std::vector<std::uint64_t> out;
    for (const auto& step : history) out.push_back(step_code(step));
    return out;
  }

  /// True if trajectory k produces the given messages at steps 1..codes.size().
  bool matches(std::size_t k, const std::vector<std::uint64_t>& codes) const {
    const auto& steps = trajectories_[k].steps;
    for (std::size_t s = 0; s < codes.size(); ++s) {
      if (steps[s] != codes[s]) return false;
    }
    return true;
  }

  /// Messages received by sensor i along trajectory k.
  MessageHistory messages(std::size_t k, int steps) const {
    MessageHistory out;
    for (int s = 0; s < steps; ++s) out.push_back(decode_step(trajectories_[k].steps[s]));
    return out;
  }

  /// sum_k 1{messages match} P(y^{-i} = k | h), for h = 0, 1.
  std::array<double, 2> compatible_mass(const MessageHistory& history) const {
    if (static_cast<int>(history.size()) > depth_) {
      throw Error(ErrorKind::kParameterOutOfRange, "message history longer than the map depth");
    }
    const auto codes = step_codes(history);
    std::array<KahanSum, 2> sum;
    for (std::size_t k = 0; k < trajectories_.size(); ++k) {
      if (!matches(k, codes)) continue;
      for (int h = 0; h < 2; ++h) sum[h].add(trajectories_[k].prob[h]);
    }
    return {sum[0].value(), sum[1].value()};
  }

  /// Writes trajectory k into the other sensors' rows of obs.
  void fill(std::size_t k, JointObservations& obs) const {
    for (std::size_t j = 0; j < others_.size(); ++j) {
      for (int s = 1; s <= depth_; ++s) obs[others_[j]][s - 1] = trajectories_[k].obs[j * depth_ + s - 1];
    }
  }

 private:
  const Scenario* scenario_;
  int sensor_;
  int depth_;
  std::vector<int> others_;
  std::vector<int> predecessors_;
  std::vector<Trajectory> trajectories_;
};

/// Sparse posterior over (H, other sensors' trajectory) on a SystemMap's support.
struct JointBelief {
  struct Entry {
    int h = 0;
    std::size_t trajectory = 0;
    double p = 0.0;
  };
  std::vector<Entry> entries;

  double marginal(int h) const {
    KahanSum sum;
    for (const auto& e : entries) {
      if (e.h == h) sum.add(e.p);
    }
    return sum.value();
  }
  double total() const {
    KahanSum sum;
    for (const auto& e : entries) sum.add(e.p);
    return sum.value();
  }
};

/// rho(h, k) = pi(h) 1{messages match} P(k | h) / sum_k' 1{match} P(k' | h).
/// Messages are compared on the first `history.size()` steps of each trajectory.
inline JointBelief rho_from_pi(const SystemMap& map, double pi, const MessageHistory& history) {
  if (!(pi >= 0.0 && pi <= 1.0)) throw Error(ErrorKind::kParameterOutOfRange, "belief must lie in [0,1]");
  const auto mass = map.compatible_mass(history);
  const std::array<double, 2> weight{pi, 1.0 - pi};
  for (int h = 0; h < 2; ++h) {
    if (weight[h] > 0.0 && !(mass[h] > 0.0)) {
      throw Error(ErrorKind::kNoCompatibleHistory, "no trajectory of the other sensors under H=" + std::to_string(h) +
                                                        " produces messages " + format_message_history(history));
    }
  }
  const auto codes = map.step_codes(history);
  JointBelief rho;
  for (std::size_t k = 0; k < map.size(); ++k) {
    if (!map.matches(k, codes)) continue;
    for (int h = 0; h < 2; ++h) {
      const double p = map.trajectories()[k].prob[h];
      if (weight[h] > 0.0 && p > 0.0) rho.entries.push_back({h, k, weight[h] * p / mass[h]});
    }
  }
  return rho;
}

/// Conditions rho on the messages received at step t.
inline JointBelief sigma_update(const JointBelief& rho, const SystemMap& map, int t, const MessageVector& messages) {
  if (t < 1 || t > map.depth()) throw Error(ErrorKind::kParameterOutOfRange, "message step outside the map depth");
  const auto code = map.step_code(messages);
  JointBelief sigma;
  KahanSum total;
  for (const auto& e : rho.entries) {
    if (map.trajectories()[e.trajectory].steps[t - 1] == code) {
      sigma.entries.push_back(e);
      total.add(e.p);
    }
  }
  const double z = total.value();
  if (!(z > 0.0)) {
    throw Error(ErrorKind::kNoCompatibleHistory, "messages " + format_message_history({messages}) + " at t=" +
                                                      std::to_string(t) + " have zero probability");
  }
  for (auto& e : sigma.entries) e.p /= z;
  return sigma;
}

/// Distribution of the messages received at step t under a joint belief,
/// keyed by the map's step code.
inline std::map<std::uint64_t, double> message_distribution(const JointBelief& belief, const SystemMap& map, int t) {
  std::map<std::uint64_t, KahanSum> acc;
  for (const auto& e : belief.entries) acc[map.trajectories()[e.trajectory].steps[t - 1]].add(e.p);
  std::map<std::uint64_t, double> out;
  for (const auto& [code, sum] : acc) out[code] = sum.value();
  return out;
}

/// pi_{t+1} from pi_t, the messages u_{1:t-1} already received, the messages
/// u_t just received and the next own observation. `map` must reach depth t.
/// At t = 0 there is nothing to condition on and this is a plain Bayes step.
inline double lemma1_update(const SystemMap& map, int t, double pi, const MessageHistory& past,
                            const MessageVector& current, int y_next) {
  const Scenario& scenario = map.scenario();
  const int i = map.sensor();
  if (t < 0 || t >= scenario.horizon()) throw Error(ErrorKind::kParameterOutOfRange, "update time outside 0..T-1");
  auto likelihood = [&](int h) { return scenario.observations().prob(i, t + 1, h, y_next); };
  if (t == 0) return bayes_step(pi, likelihood(0), likelihood(1));
  if (static_cast<int>(past.size()) != t - 1) {
    throw Error(ErrorKind::kParameterOutOfRange, "update at time t needs t-1 past message steps");
  }
  const JointBelief rho = rho_from_pi(map, pi, past);
  const JointBelief sigma = sigma_update(rho, map, t, current);
  return bayes_step(sigma.marginal(0), likelihood(0), likelihood(1));
}

/// Direct posterior P(H=0 | y_{1:t}, u_{1:t-1}, own decisions blank) from a map of depth t-1.
inline double posterior_from_history(const SystemMap& map, const PrivateHistory& history) {
  const Scenario& scenario = map.scenario();
  const int t = history.time();
  if (t == 0) return scenario.prior();
  if (map.depth() != t - 1) throw Error(ErrorKind::kParameterOutOfRange, "posterior at time t needs a map of depth t-1");
  const auto mass = map.compatible_mass(history.messages);
  std::array<double, 2> joint{};
  for (int h = 0; h < 2; ++h) {
    double likelihood = scenario.prior_of(h) * mass[h];
    for (int s = 1; s <= t; ++s) likelihood *= scenario.observations().prob(map.sensor(), s, h, history.observations[s - 1]);
    joint[h] = likelihood;
  }
  const double z = joint[0] + joint[1];
  if (!(z > 0.0)) {
    throw Error(ErrorKind::kZeroProbabilityHistory, "history " + format_history(history) + " has zero probability");
  }
  return joint[0] / z;
}

inline double posterior_from_history(const Scenario& scenario, const TabularProfile& profile,
                                     const PrivateHistory& history) {
  if (history.time() == 0) return scenario.prior();
  history_shape(scenario, history.sensor).validate(history);
  SystemMap map(scenario, profile, history.sensor, history.time() - 1);
  return posterior_from_history(map, history);
}

/// Lazily built system maps of one sensor, one per depth.
class BeliefContext {
 public:
  BeliefContext(const Scenario& scenario, const TabularProfile& profile, int sensor)
      : scenario_(&scenario), profile_(&profile), sensor_(sensor), maps_(scenario.horizon() + 1) {}

  const SystemMap& map(int depth) const {
    auto& slot = maps_.at(depth);
    if (!slot) slot = std::make_unique<SystemMap>(*scenario_, *profile_, sensor_, depth);
    return *slot;
  }

  /// pi_t obtained by chaining lemma1_update along the history.
  double chained_posterior(const PrivateHistory& history) const {
    double pi = scenario_->prior();
    MessageHistory past;
    for (int s = 0; s < history.time(); ++s) {
      const MessageVector current = s == 0 ? MessageVector{} : history.messages[s - 1];
      pi = lemma1_update(map(s), s, pi, past, current, history.observations[s]);
      if (s > 0) past.push_back(current);
    }
    return pi;
  }

  double direct_posterior(const PrivateHistory& history) const {
    if (history.time() == 0) return scenario_->prior();
    return posterior_from_history(map(history.time() - 1), history);
  }

 private:
  const Scenario* scenario_;
  const TabularProfile* profile_;
  int sensor_;
  mutable std::vector<std::unique_ptr<SystemMap>> maps_;
};

}  // namespace sigdet
