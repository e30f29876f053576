#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sigdet/belief.hpp"
#include "sigdet/dynamics.hpp"
#include "sigdet/error.hpp"
#include "sigdet/evaluator.hpp"
#include "sigdet/history.hpp"
#include "sigdet/model.hpp"
#include "sigdet/numeric.hpp"
#include "sigdet/profile.hpp"
#include "sigdet/strategy.hpp"

namespace sigdet {

// ---------------------------------------------------------------------------
// Value tables

/// Costs of every action at one information state (or one history).
struct ValueEntry {
  MessageHistory messages;
  double pi = 0.0;
  /// Probability of reaching this state while the sensor is still blank.
  double weight = 0.0;
  double value = 0.0;
  std::vector<double> stop_cost;
  /// Absent at the horizon.
  std::optional<double> continue_cost;
  Decision action;
  /// Set only by the history-level solver.
  std::optional<PrivateHistory> history;
};

struct ValueTable {
  int sensor = 0;
  int horizon = 1;
  int message_alphabet = 2;
  /// steps[t-1], ordered by message history then pi.
  std::vector<std::vector<ValueEntry>> steps;

  /// E[V_1] over the reachable t = 1 states.
  double root_value() const {
    KahanSum sum;
    for (const auto& e : steps.at(0)) sum.add(e.weight * e.value);
    return sum.value();
  }
  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& s : steps) n += s.size();
    return n;
  }
};

inline std::string action_name(Decision d) { return d.is_blank() ? "continue" : "stop" + std::to_string(d.value()); }

/// Picks the cheapest action with ties going to stop-0, stop-1, ..., continue.
/// Costs within a relative 1e-12 of the minimum count as ties.
inline Decision choose_action(const std::vector<double>& stop_cost, std::optional<double> continue_cost,
                              double& value) {
  double best = std::numeric_limits<double>::infinity();
  for (double c : stop_cost) best = std::min(best, c);
  if (continue_cost) best = std::min(best, *continue_cost);
  const double slack = 1e-12 * std::max(1.0, std::abs(best));
  for (std::size_t m = 0; m < stop_cost.size(); ++m) {
    if (stop_cost[m] <= best + slack) {
      value = stop_cost[m];
      return Decision::stop(static_cast<int>(m));
    }
  }
  value = *continue_cost;
  return Decision::blank();
}

inline void sort_value_table(ValueTable& table) {
  for (auto& step : table.steps) {
    std::stable_sort(step.begin(), step.end(), [](const ValueEntry& a, const ValueEntry& b) {
      const auto ka = message_history_key(a.messages);
      const auto kb = message_history_key(b.messages);
      if (ka != kb) return ka < kb;
      return a.pi < b.pi;
    });
  }
}

struct BestResponse {
  int sensor = 0;
  TabularStrategy strategy;
  /// Input profile with the sensor's strategy replaced.
  TabularProfile profile;
  /// Optimal expected cost according to the solver.
  double value = 0.0;
  /// Exact evaluation of `profile`.
  CostReport report;
  ValueTable table;
  /// True when the table has one entry per private history instead of per information state.
  bool history_level = false;
};

struct BestResponseOptions {
  /// Group histories by (pi, messages). When false the DP runs on the raw
  /// private-history tree, which is what the sufficiency check needs.
  bool group_info_states = true;
  std::uint64_t budget = default_budget();
};

namespace detail {

/// Expected-cost table for forcing sensor i to stop at step s with symbol m
/// while the others follow trajectory k of the map: cost[k][(s-1)*M + m][h].
inline std::vector<std::vector<std::array<double, 2>>> plan_costs(const Scenario& scenario,
                                                                  const TabularProfile& profile,
                                                                  const SystemMap& map) {
  const int i = map.sensor();
  const int horizon = scenario.horizon();
  const int m_count = scenario.message_alphabet();
  Dynamics dynamics(scenario);
  JointObservations obs(scenario.sensor_count(), std::vector<int>(horizon, 0));
  std::vector<std::vector<std::array<double, 2>>> out(map.size());
  for (std::size_t k = 0; k < map.size(); ++k) {
    map.fill(k, obs);
    out[k].resize(static_cast<std::size_t>(horizon * m_count));
    for (int s = 1; s <= horizon; ++s) {
      for (int m = 0; m < m_count; ++m) {
        const auto outcome = dynamics.run(
            [&](int j, int t, std::uint64_t code) {
              if (j != i) return profile[j].decide(t, code);
              return t < s ? Decision::blank() : Decision::stop(m);
            },
            obs, horizon);
        for (int h = 0; h < 2; ++h) out[k][(s - 1) * m_count + m][h] = total_cost(scenario, h, outcome).total();
      }
    }
  }
  return out;
}

inline TabularProfile replace(const TabularProfile& profile, int sensor, const TabularStrategy& strategy) {
  TabularProfile out = profile;
  out.at(sensor) = strategy;
  return out;
}

inline void check_sensor(const Scenario& scenario, int sensor) {
  if (sensor < 0 || sensor >= scenario.sensor_count()) {
    throw Error(ErrorKind::kParameterOutOfRange, "sensor " + std::to_string(sensor + 1) + " does not exist");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Private-history tree (independent of the belief machinery)

/// Every private history of sensor i that has positive probability while i
/// stays blank, built by enumerating joint trajectories and rolling them out.
struct HistoryTree {
  struct Node {
    int t = 0;
    std::uint64_t code = 0;
    int parent = -1;
    PrivateHistory history;
    std::vector<int> children;
  };
  /// One joint trajectory (h, all observations) with positive probability.
  struct Point {
    int h = 0;
    double weight = 0.0;
    /// Node visited at each step.
    std::vector<int> path;
    /// Total cost if i stops at s with m: plan_cost[(s-1)*M + m].
    std::vector<double> plan_cost;
  };

  int sensor = 0;
  int horizon = 1;
  int message_alphabet = 2;
  /// Ordered by (t, code).
  std::vector<Node> nodes;
  std::vector<Point> points;
};

inline HistoryTree build_history_tree(const Scenario& scenario, const TabularProfile& profile, int sensor,
                                      std::uint64_t budget = default_budget()) {
  check_profile(scenario, profile);
  detail::check_sensor(scenario, sensor);
  const int horizon = scenario.horizon();
  const int m_count = scenario.message_alphabet();
  const HistoryShape shape = history_shape(scenario, sensor);
  Dynamics dynamics(scenario);

  HistoryTree tree;
  tree.sensor = sensor;
  tree.horizon = horizon;
  tree.message_alphabet = m_count;
  std::vector<std::map<std::uint64_t, int>> seen(horizon);
  std::vector<std::uint64_t> codes(horizon);
  for_each_joint_trajectory(
      scenario,
      [&](int h, double weight, const JointObservations& obs) {
        HistoryTree::Point point;
        point.h = h;
        point.weight = weight;
        dynamics.run(
            [&](int j, int t, std::uint64_t code) {
              if (j == sensor) {
                codes[t - 1] = code;
                return Decision::blank();
              }
              return profile[j].decide(t, code);
            },
            obs, horizon);
        for (int t = 1; t <= horizon; ++t) {
          auto [it, inserted] = seen[t - 1].emplace(codes[t - 1], static_cast<int>(tree.nodes.size()));
          if (inserted) {
            HistoryTree::Node node;
            node.t = t;
            node.code = codes[t - 1];
            node.parent = t > 1 ? point.path[t - 2] : -1;
            node.history = shape.decode(sensor, t, codes[t - 1]);
            tree.nodes.push_back(std::move(node));
          }
          point.path.push_back(it->second);
        }
        point.plan_cost.resize(static_cast<std::size_t>(horizon * m_count));
        for (int s = 1; s <= horizon; ++s) {
          for (int m = 0; m < m_count; ++m) {
            const auto outcome = dynamics.run(
                [&](int j, int t, std::uint64_t code) {
                  if (j != sensor) return profile[j].decide(t, code);
                  return t < s ? Decision::blank() : Decision::stop(m);
                },
                obs, horizon);
            point.plan_cost[(s - 1) * m_count + m] = total_cost(scenario, h, outcome).total();
          }
        }
        tree.points.push_back(std::move(point));
      },
      budget);

  // Reorder nodes canonically by (t, code).
  std::vector<int> order(tree.nodes.size());
  for (std::size_t n = 0; n < order.size(); ++n) order[n] = static_cast<int>(n);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& x = tree.nodes[a];
    const auto& y = tree.nodes[b];
    return x.t != y.t ? x.t < y.t : x.code < y.code;
  });
  std::vector<int> rank(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = static_cast<int>(r);
  std::vector<HistoryTree::Node> sorted;
  for (int n : order) sorted.push_back(std::move(tree.nodes[n]));
  for (auto& node : sorted) {
    if (node.parent >= 0) node.parent = rank[node.parent];
  }
  for (std::size_t n = 0; n < sorted.size(); ++n) {
    if (sorted[n].parent >= 0) sorted[sorted[n].parent].children.push_back(static_cast<int>(n));
  }
  tree.nodes = std::move(sorted);
  for (auto& point : tree.points) {
    for (auto& n : point.path) n = rank[n];
  }
  return tree;
}

namespace detail {

inline BestResponse history_best_response(const Scenario& scenario, const TabularProfile& profile, int sensor,
                                          std::uint64_t budget) {
  const HistoryTree tree = build_history_tree(scenario, profile, sensor, budget);
  const int horizon = scenario.horizon();
  const int m_count = scenario.message_alphabet();
  const std::size_t count = tree.nodes.size();

  std::vector<KahanSum> mass(count), mass0(count);
  std::vector<std::vector<KahanSum>> stop(count, std::vector<KahanSum>(m_count));
  for (const auto& p : tree.points) {
    for (int t = 1; t <= horizon; ++t) {
      const int n = p.path[t - 1];
      mass[n].add(p.weight);
      if (p.h == 0) mass0[n].add(p.weight);
      for (int m = 0; m < m_count; ++m) stop[n][m].add(p.weight * p.plan_cost[(t - 1) * m_count + m]);
    }
  }

  std::vector<ValueEntry> entries(count);
  for (std::size_t r = count; r-- > 0;) {
    const auto& node = tree.nodes[r];
    auto& e = entries[r];
    const double w = mass[r].value();
    e.messages = node.history.messages;
    e.history = node.history;
    e.weight = w;
    e.pi = mass0[r].value() / w;
    for (int m = 0; m < m_count; ++m) e.stop_cost.push_back(stop[r][m].value() / w);
    if (node.t < horizon) {
      KahanSum cont;
      for (int c : node.children) cont.add(mass[c].value() / w * entries[c].value);
      e.continue_cost = cont.value();
    }
    e.action = choose_action(e.stop_cost, e.continue_cost, e.value);
  }

  BestResponse out;
  out.sensor = sensor;
  out.history_level = true;
  out.strategy = TabularStrategy(history_shape(scenario, sensor));
  out.table.sensor = sensor;
  out.table.horizon = horizon;
  out.table.message_alphabet = m_count;
  out.table.steps.resize(horizon);
  for (std::size_t r = 0; r < count; ++r) {
    out.strategy.set(tree.nodes[r].t, tree.nodes[r].code, entries[r].action);
    out.table.steps[tree.nodes[r].t - 1].push_back(entries[r]);
  }
  sort_value_table(out.table);
  out.value = out.table.root_value();
  out.profile = replace(profile, sensor, out.strategy);
  out.report = exact_expected_cost(scenario, out.profile, budget);
  return out;
}

/// Info-state DP: states are (received messages, pi) with pi merged at 1e-9.
inline BestResponse grouped_best_response(const Scenario& scenario, const TabularProfile& profile, int sensor,
                                          std::uint64_t budget) {
  const int horizon = scenario.horizon();
  const int m_count = scenario.message_alphabet();
  const auto& model = scenario.observations();
  const int alphabet = model.alphabet_size(sensor);
  const SystemMap map(scenario, profile, sensor, horizon, budget);
  const auto cost = plan_costs(scenario, profile, map);

  struct Child {
    std::uint64_t message = 0;
    int y = 0;
    int state = 0;
    double prob = 0.0;
  };
  struct State {
    MessageHistory messages;
    double pi = 0.0;
    double weight = 0.0;
    std::vector<Child> children;
    ValueEntry entry;
  };
  std::vector<std::vector<State>> layers(horizon);
  std::vector<std::map<std::vector<int>, std::vector<int>>> index(horizon);

  auto intern = [&](int t, const MessageHistory& messages, double pi, double weight) {
    auto& bucket = index[t - 1][message_history_key(messages)];
    for (int s : bucket) {
      if (std::abs(layers[t - 1][s].pi - pi) <= kBeliefTolerance) {
        layers[t - 1][s].weight += weight;
        return s;
      }
    }
    layers[t - 1].push_back(State{messages, pi, weight, {}, {}});
    bucket.push_back(static_cast<int>(layers[t - 1].size()) - 1);
    return bucket.back();
  };

  std::vector<std::pair<int, int>> initial;  // (y_1, state)
  for (int y = 0; y < alphabet; ++y) {
    const double f0 = model.prob(sensor, 1, 0, y);
    const double f1 = model.prob(sensor, 1, 1, y);
    const double p = scenario.prior_of(0) * f0 + scenario.prior_of(1) * f1;
    if (!(p > 0.0)) continue;
    initial.emplace_back(y, intern(1, {}, bayes_step(scenario.prior(), f0, f1), p));
  }

  // Forward: every state reachable while the sensor stays blank.
  for (int t = 1; t < horizon; ++t) {
    for (std::size_t s = 0; s < layers[t - 1].size(); ++s) {
      const MessageHistory messages = layers[t - 1][s].messages;
      const double pi = layers[t - 1][s].pi;
      const JointBelief rho = rho_from_pi(map, pi, messages);
      for (const auto& [code, pu] : message_distribution(rho, map, t)) {
        if (!(pu > 0.0)) continue;
        const MessageVector u = map.decode_step(code);
        const JointBelief sigma = sigma_update(rho, map, t, u);
        const double s0 = sigma.marginal(0);
        const double s1 = sigma.marginal(1);
        MessageHistory next = messages;
        next.push_back(u);
        for (int y = 0; y < alphabet; ++y) {
          const double f0 = model.prob(sensor, t + 1, 0, y);
          const double f1 = model.prob(sensor, t + 1, 1, y);
          const double py = f0 * s0 + f1 * s1;
          if (!(py > 0.0)) continue;
          const double weight = layers[t - 1][s].weight;
          const int child = intern(t + 1, next, bayes_step(s0, f0, f1), weight * pu * py);
          layers[t - 1][s].children.push_back({code, y, child, pu * py});
        }
      }
    }
  }

  // Backward induction.
  for (int t = horizon; t >= 1; --t) {
    for (auto& state : layers[t - 1]) {
      const JointBelief rho = rho_from_pi(map, state.pi, state.messages);
      std::vector<KahanSum> stop(m_count);
      for (const auto& e : rho.entries) {
        for (int m = 0; m < m_count; ++m) stop[m].add(e.p * cost[e.trajectory][(t - 1) * m_count + m][e.h]);
      }
      ValueEntry& entry = state.entry;
      entry.messages = state.messages;
      entry.pi = state.pi;
      entry.weight = state.weight;
      for (int m = 0; m < m_count; ++m) entry.stop_cost.push_back(stop[m].value());
      if (t < horizon) {
        KahanSum cont;
        for (const auto& c : state.children) cont.add(c.prob * layers[t][c.state].entry.value);
        entry.continue_cost = cont.value();
      }
      entry.action = choose_action(entry.stop_cost, entry.continue_cost, entry.value);
    }
  }

  BestResponse out;
  out.sensor = sensor;
  const HistoryShape shape = history_shape(scenario, sensor);
  out.strategy = TabularStrategy(shape);
  // Every history reachable while blank gets its state's action.
  std::vector<std::tuple<int, std::uint64_t, int>> stack;
  for (const auto& [y, s] : initial) stack.emplace_back(1, shape.push_observation(0, y), s);
  while (!stack.empty()) {
    const auto [t, code, s] = stack.back();
    stack.pop_back();
    const State& state = layers[t - 1][s];
    out.strategy.set(t, code, state.entry.action);
    for (const auto& c : state.children) {
      const std::uint64_t next = shape.push_observation(shape.push_messages(code, map.decode_step(c.message)), c.y);
      stack.emplace_back(t + 1, next, c.state);
    }
  }

  out.table.sensor = sensor;
  out.table.horizon = horizon;
  out.table.message_alphabet = m_count;
  out.table.steps.resize(horizon);
  for (int t = 1; t <= horizon; ++t) {
    for (const auto& state : layers[t - 1]) out.table.steps[t - 1].push_back(state.entry);
  }
  sort_value_table(out.table);
  out.value = out.table.root_value();
  out.profile = replace(profile, sensor, out.strategy);
  out.report = exact_expected_cost(scenario, out.profile, budget);
  return out;
}

}  // namespace detail

/// Optimal strategy of one sensor with every other strategy fixed.
inline BestResponse best_response(const Scenario& scenario, const TabularProfile& profile, int sensor,
                                  const BestResponseOptions& options = {}) {
  check_profile(scenario, profile);
  detail::check_sensor(scenario, sensor);
  return options.group_info_states ? detail::grouped_best_response(scenario, profile, sensor, options.budget)
                                   : detail::history_best_response(scenario, profile, sensor, options.budget);
}

inline BestResponse best_response(const Scenario& scenario, const StrategyProfile& profile, int sensor,
                                  const BestResponseOptions& options = {}) {
  return best_response(scenario, compile_profile(scenario, profile), sensor, options);
}

/// Exhaustive search over every history table of one sensor. Candidates are
/// visited in lexicographic order over (t, code)-ordered histories with
/// actions ordered stop-0, stop-1, ..., blank; the first strict minimum wins.
inline BestResponse brute_force_best_response(const Scenario& scenario, const TabularProfile& profile, int sensor,
                                              std::uint64_t candidate_budget = kDefaultCandidateBudget) {
  const HistoryTree tree = build_history_tree(scenario, profile, sensor);
  const int horizon = scenario.horizon();
  const int m_count = scenario.message_alphabet();
  const std::size_t count = tree.nodes.size();

  std::vector<int> radix(count);
  std::uint64_t candidates = 1;
  for (std::size_t n = 0; n < count; ++n) {
    radix[n] = tree.nodes[n].t < horizon ? m_count + 1 : m_count;
    if (candidates > candidate_budget / static_cast<std::uint64_t>(radix[n])) {
      throw Error(ErrorKind::kBudgetExceeded, "brute-force candidate space exceeds " +
                                                  std::to_string(candidate_budget) + " strategies");
    }
    candidates *= static_cast<std::uint64_t>(radix[n]);
  }

  // Digit d < M stops with d; d == M continues.
  std::vector<int> digits(count, 0), best_digits;
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    KahanSum total;
    for (const auto& p : tree.points) {
      for (int t = 1; t <= horizon; ++t) {
        const int d = digits[p.path[t - 1]];
        if (d < m_count) {
          total.add(p.weight * p.plan_cost[(t - 1) * m_count + d]);
          break;
        }
      }
    }
    const double value = total.value();
    if (value < best - 1e-12 * std::max(1.0, std::abs(best)) || best_digits.empty()) {
      best = value;
      best_digits = digits;
    }
    std::size_t pos = count;
    while (pos > 0 && ++digits[pos - 1] == radix[pos - 1]) digits[--pos] = 0;
    if (pos == 0) break;
  }

  BestResponse out;
  out.sensor = sensor;
  out.history_level = true;
  out.strategy = TabularStrategy(history_shape(scenario, sensor));
  for (std::size_t n = 0; n < count; ++n) {
    const int d = best_digits[n];
    out.strategy.set(tree.nodes[n].t, tree.nodes[n].code, d < m_count ? Decision::stop(d) : Decision::blank());
  }
  out.value = best;
  out.profile = detail::replace(profile, sensor, out.strategy);
  out.report = exact_expected_cost(scenario, out.profile);
  return out;
}

inline BestResponse brute_force_best_response(const Scenario& scenario, const StrategyProfile& profile, int sensor,
                                              std::uint64_t candidate_budget = kDefaultCandidateBudget) {
  return brute_force_best_response(scenario, compile_profile(scenario, profile), sensor, candidate_budget);
}

// ---------------------------------------------------------------------------
// Structural checks

struct SufficiencyViolation {
  int t = 0;
  MessageHistory messages;
  double pi = 0.0;
  PrivateHistory first;
  PrivateHistory second;
  Decision first_action;
  Decision second_action;
};

struct SufficiencyReport {
  bool pass = true;
  /// Groups of histories sharing an information state.
  std::size_t groups = 0;
  std::size_t histories = 0;
  std::vector<SufficiencyViolation> violations;
};

/// Histories with the same (t, messages, pi) must share an action that is
/// optimal, within tol, for each of them.
inline SufficiencyReport verify_info_state_sufficiency(const BestResponse& response, double tol = 1e-9) {
  if (!response.history_level) {
    throw Error(ErrorKind::kParameterOutOfRange, "sufficiency check needs a history-level best response");
  }
  SufficiencyReport report;
  for (int t = 1; t <= response.table.horizon; ++t) {
    const auto& step = response.table.steps[t - 1];
    std::size_t a = 0;
    while (a < step.size()) {
      std::size_t b = a + 1;
      while (b < step.size() && step[b].messages == step[a].messages &&
             std::abs(step[b].pi - step[b - 1].pi) <= kBeliefTolerance) {
        ++b;
      }
      ++report.groups;
      report.histories += b - a;
      const int m_count = static_cast<int>(step[a].stop_cost.size());
      bool shared = false;
      for (int m = 0; m <= m_count && !shared; ++m) {
        if (m == m_count && t == response.table.horizon) break;
        bool ok = true;
        for (std::size_t k = a; k < b && ok; ++k) {
          const double c = m < m_count ? step[k].stop_cost[m] : *step[k].continue_cost;
          ok = c <= step[k].value + tol;
        }
        shared = ok;
      }
      if (!shared) {
        report.pass = false;
        // Witness: two members whose optimal actions differ.
        std::size_t other = a + 1;
        while (other < b && step[other].action == step[a].action) ++other;
        if (other == b) other = std::min(a + 1, b - 1);
        report.violations.push_back({t, step[a].messages, step[a].pi, *step[a].history, *step[other].history,
                                     step[a].action, step[other].action});
      }
      a = b;
    }
  }
  return report;
}

/// One reachable belief of a (t, messages) group.
struct BeliefPoint {
  double pi = 0.0;
  double value = 0.0;
  Decision action;
};

struct StructureGroup {
  int t = 0;
  MessageHistory messages;
  /// Sorted by pi, merged at 1e-9.
  std::vector<BeliefPoint> points;
  /// [first, last] reachable pi of each stop region, indexed by symbol.
  std::vector<std::optional<Interval>> regions;
};

struct ConcavityViolation {
  int t = 0;
  MessageHistory messages;
  std::array<double, 3> pi{};
  std::array<double, 3> value{};
  /// How far the middle value lies below the chord.
  double gap = 0.0;
};

struct IntervalViolation {
  int t = 0;
  MessageHistory messages;
  Decision action;
  double pi = 0.0;
  std::string detail;
};

struct StructureReport {
  std::vector<StructureGroup> groups;
  std::vector<ConcavityViolation> concavity;
  std::vector<IntervalViolation> intervals;
  /// Interval rule read off the table; empty if the regions overlap.
  std::optional<ThresholdStrategy> candidate;
  std::string scope =
      "checks cover reachable beliefs only; behaviour between reachable points is inferred, not verified";

  bool concave() const { return concavity.empty(); }
  bool interval_structure() const { return intervals.empty(); }
};

namespace detail {

inline std::vector<StructureGroup> structure_groups(const ValueTable& table,
                                                    std::vector<std::vector<const ValueEntry*>>* members = nullptr) {
  std::vector<StructureGroup> groups;
  for (int t = 1; t <= table.horizon; ++t) {
    const auto& step = table.steps.at(t - 1);
    for (std::size_t a = 0; a < step.size();) {
      std::size_t b = a;
      StructureGroup group;
      group.t = t;
      group.messages = step[a].messages;
      std::vector<const ValueEntry*> kept;
      for (; b < step.size() && step[b].messages == step[a].messages; ++b) {
        if (!group.points.empty() && std::abs(step[b].pi - group.points.back().pi) <= kBeliefTolerance) continue;
        group.points.push_back({step[b].pi, step[b].value, step[b].action});
        kept.push_back(&step[b]);
      }
      if (members != nullptr) members->push_back(std::move(kept));
      groups.push_back(std::move(group));
      a = b;
    }
  }
  return groups;
}

}  // namespace detail

/// Every consecutive triple of reachable beliefs must lie on or above the chord.
inline StructureReport verify_concavity(const ValueTable& table, double tol = 1e-9) {
  StructureReport report;
  report.groups = detail::structure_groups(table);
  for (const auto& g : report.groups) {
    for (std::size_t k = 0; k + 2 < g.points.size(); ++k) {
      const auto& a = g.points[k];
      const auto& b = g.points[k + 1];
      const auto& c = g.points[k + 2];
      const double chord = a.value + (c.value - a.value) * (b.pi - a.pi) / (c.pi - a.pi);
      if (b.value < chord - tol) {
        report.concavity.push_back({g.t, g.messages, {a.pi, b.pi, c.pi}, {a.value, b.value, c.value}, chord - b.value});
      }
    }
  }
  return report;
}

/// Each stop symbol's optimal set must be contiguous in pi (ties count as
/// members) and the horizon must never continue. Also emits the implied
/// interval rule.
inline StructureReport extract_intervals(const ValueTable& table, double tol = 1e-9) {
  StructureReport report;
  std::vector<std::vector<const ValueEntry*>> members;
  report.groups = detail::structure_groups(table, &members);
  const int m_count = table.message_alphabet;
  ThresholdStrategy candidate(table.horizon, m_count);
  bool candidate_ok = true;

  for (std::size_t gi = 0; gi < report.groups.size(); ++gi) {
    auto& g = report.groups[gi];
    const auto& entries = members[gi];
    g.regions.assign(m_count, std::nullopt);
    for (std::size_t k = 0; k < entries.size(); ++k) {
      if (g.t == table.horizon && entries[k]->action.is_blank()) {
        report.intervals.push_back({g.t, g.messages, entries[k]->action, entries[k]->pi, "continues at the horizon"});
      }
    }
    for (int m = 0; m < m_count; ++m) {
      std::optional<std::size_t> first, last;
      for (std::size_t k = 0; k < entries.size(); ++k) {
        if (entries[k]->action == Decision::stop(m)) {
          if (!first) first = k;
          last = k;
        }
      }
      if (!first) continue;
      g.regions[m] = Interval{entries[*first]->pi, entries[*last]->pi};
      for (std::size_t k = *first; k <= *last; ++k) {
        if (entries[k]->stop_cost[m] > entries[k]->value + tol) {
          report.intervals.push_back({g.t, g.messages, entries[k]->action, entries[k]->pi,
                                      "stop" + std::to_string(m) + " region is not contiguous"});
        }
      }
    }

    // Candidate rule; at the horizon the regions are stretched to cover [0,1].
    ThresholdRule rule{g.regions};
    if (g.t == table.horizon) {
      std::vector<int> order;
      for (int m = 0; m < m_count; ++m) {
        if (rule.stop[m]) order.push_back(m);
      }
      std::sort(order.begin(), order.end(), [&](int a, int b) { return rule.stop[a]->lo < rule.stop[b]->lo; });
      for (std::size_t k = 0; k < order.size(); ++k) {
        auto& iv = *rule.stop[order[k]];
        if (k == 0) iv.lo = 0.0;
        iv.hi = k + 1 < order.size() ? std::max(iv.hi, rule.stop[order[k + 1]]->lo) : 1.0;
      }
    }
    try {
      candidate.set_rule(g.t, g.messages, rule);
    } catch (const Error&) {
      candidate_ok = false;
    }
  }
  if (candidate_ok) report.candidate = candidate;
  return report;
}

// ---------------------------------------------------------------------------
// Person-by-person iteration

struct PersonByPersonResult {
  TabularProfile profile;
  /// Initial cost, then the cost after every sensor update.
  std::vector<double> trace;
  int rounds = 0;
  bool converged = false;
};

inline PersonByPersonResult person_by_person(const Scenario& scenario, const TabularProfile& initial, int max_rounds,
                                             double tol = 1e-10, const BestResponseOptions& options = {}) {
  if (max_rounds < 1) throw Error(ErrorKind::kParameterOutOfRange, "max_rounds must be >= 1");
  PersonByPersonResult out;
  out.profile = initial;
  double cost = exact_expected_cost(scenario, out.profile, options.budget).expected_cost;
  out.trace.push_back(cost);
  for (int round = 1; round <= max_rounds; ++round) {
    out.rounds = round;
    const double start = cost;
    for (int i = 0; i < scenario.sensor_count(); ++i) {
      BestResponse br = best_response(scenario, out.profile, i, options);
      // Keep the old rule unless the replacement is at least as good.
      if (br.report.expected_cost <= cost) {
        out.profile = std::move(br.profile);
        cost = br.report.expected_cost;
      }
      out.trace.push_back(cost);
    }
    if (start - cost < tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

inline PersonByPersonResult person_by_person(const Scenario& scenario, const StrategyProfile& initial, int max_rounds,
                                             double tol = 1e-10, const BestResponseOptions& options = {}) {
  return person_by_person(scenario, compile_profile(scenario, initial), max_rounds, tol, options);
}

// ---------------------------------------------------------------------------
// CSV export

inline std::string value_table_csv(const ValueTable& table) {
  std::string out = "t,message_history,pi,V";
  for (int m = 0; m < table.message_alphabet; ++m) out += ",cost_stop" + std::to_string(m);
  out += ",cost_continue,argmin\n";
  for (int t = 1; t <= table.horizon; ++t) {
    for (const auto& e : table.steps[t - 1]) {
      out += std::to_string(t) + "," + format_message_history(e.messages) + "," + format_double(e.pi) + "," +
             format_double(e.value);
      for (double c : e.stop_cost) out += "," + format_double(c);
      out += "," + (e.continue_cost ? format_double(*e.continue_cost) : std::string()) + "," + action_name(e.action) +
             "\n";
    }
  }
  return out;
}

inline std::string format_regions(const std::vector<std::optional<Interval>>& regions) {
  std::string out;
  for (std::size_t m = 0; m < regions.size(); ++m) {
    if (!regions[m]) continue;
    if (!out.empty()) out += ";";
    out += "stop" + std::to_string(m) + ":[" + format_double(regions[m]->lo) + " " + format_double(regions[m]->hi) + "]";
  }
  return out.empty() ? "-" : out;
}

/// One row per (t, message history) with both verdicts.
inline std::string structure_csv(const StructureReport& concavity, const StructureReport& intervals) {
  std::string out = "t,message_history,points,concave,intervals,regions\n";
  for (const auto& g : intervals.groups) {
    auto same = [&](const auto& v) { return v.t == g.t && v.messages == g.messages; };
    const bool concave = std::none_of(concavity.concavity.begin(), concavity.concavity.end(), same);
    const bool contiguous = std::none_of(intervals.intervals.begin(), intervals.intervals.end(), same);
    out += std::to_string(g.t) + "," + format_message_history(g.messages) + "," + std::to_string(g.points.size()) +
           "," + (concave ? "pass" : "fail") + "," + (contiguous ? "pass" : "fail") + "," + format_regions(g.regions) +
           "\n";
  }
  return out;
}

/// pi vs V per (t, message history), ready for plotting.
inline std::string plot_series_csv(const ValueTable& table) {
  std::string out = "series,t,message_history,pi,V,argmin\n";
  for (const auto& g : detail::structure_groups(table)) {
    const std::string series = "t" + std::to_string(g.t) + ":" + format_message_history(g.messages);
    for (const auto& p : g.points) {
      out += series + "," + std::to_string(g.t) + "," + format_message_history(g.messages) + "," +
             format_double(p.pi) + "," + format_double(p.value) + "," + action_name(p.action) + "\n";
    }
  }
  return out;
}

}  // namespace sigdet
