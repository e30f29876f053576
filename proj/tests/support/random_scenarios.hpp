#pragma once

// Seeded generators for small random instances used by the property tests.

#include <cstdint>
#include <random>
#include <vector>

#include "sigdet/sigdet.hpp"

namespace sigdet::testing {

struct RandomScenarioOptions {
  int min_sensors = 1;
  int max_sensors = 2;
  int min_horizon = 2;
  int max_horizon = 2;
  int min_alphabet = 2;
  int max_alphabet = 2;
  int message_alphabet = 2;
  /// Chance of each ordered edge.
  double edge_probability = 0.5;
  /// Use explicit table costs; otherwise pick a random named form.
  bool table_costs = true;
};

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// pmf with small integer weights a_y / sum a, at least one of them nonzero.
inline std::vector<double> random_pmf(std::mt19937_64& rng, int size) {
  std::vector<int> weights(size);
  int total = 0;
  while (total == 0) {
    total = 0;
    for (auto& w : weights) {
      w = uniform_int(rng, 0, 4);
      total += w;
    }
  }
  std::vector<double> out;
  for (int w : weights) out.push_back(static_cast<double>(w) / total);
  return out;
}

inline Scenario random_scenario(std::mt19937_64& rng, const RandomScenarioOptions& opt = {}) {
  const int n = uniform_int(rng, opt.min_sensors, opt.max_sensors);
  const int horizon = uniform_int(rng, opt.min_horizon, opt.max_horizon);
  const int m = opt.message_alphabet;
  ObservationModel::Table pmf(n);
  for (int j = 0; j < n; ++j) {
    const int alphabet = uniform_int(rng, opt.min_alphabet, opt.max_alphabet);
    for (int t = 0; t < horizon; ++t) pmf[j].push_back({random_pmf(rng, alphabet), random_pmf(rng, alphabet)});
  }
  std::vector<std::pair<int, int>> edges;
  std::bernoulli_distribution edge(opt.edge_probability);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a != b && edge(rng)) edges.emplace_back(a, b);
    }
  }
  const double prior = uniform_int(rng, 1, 7) / 8.0;
  auto cost_value = [&](int hi) { return uniform_int(rng, 0, hi) / 2.0; };

  CostSpec costs;
  if (opt.table_costs || uniform_int(rng, 0, 1) == 0) {
    ActiveSetOperationalCost op;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) op.by_mask.push_back(mask == 0 ? 0.0 : cost_value(4));
    costs.operational = op;
  } else {
    LinearOperationalCost op;
    for (int j = 0; j < n; ++j) op.per_sensor.push_back(cost_value(4));
    costs.operational = op;
  }
  const int terminal_kind = opt.table_costs ? 0 : uniform_int(rng, 0, 2);
  if (terminal_kind == 0) {
    TableTerminalCost table;
    table.depends_on_times = uniform_int(rng, 0, 1) == 1;
    table.table.resize(terminal_table_size(n, m, horizon, table.depends_on_times));
    for (auto& v : table.table) v = cost_value(20);
    costs.terminal = table;
  } else if (terminal_kind == 1) {
    costs.terminal = LastStopperTerminalCost{cost_value(20) + 1.0};
  } else {
    FusionSensorTerminalCost fusion;
    fusion.sensor = uniform_int(rng, 0, n - 1);
    for (int h = 0; h < 2; ++h) {
      for (int u = 0; u < m; ++u) fusion.cost[h].push_back(u == h ? 0.0 : cost_value(20));
    }
    costs.terminal = fusion;
  }
  return Scenario(prior, horizon, m, ObservationModel(std::move(pmf)), CommGraph(n, std::move(edges)), costs);
}

/// Uniformly random decision for every history code.
inline TabularStrategy random_tabular(std::mt19937_64& rng, const Scenario& scenario, int sensor,
                                      double blank_bias = 0.5) {
  TabularStrategy table(history_shape(scenario, sensor));
  const int m = scenario.message_alphabet();
  std::bernoulli_distribution blank(blank_bias);
  for (int t = 1; t <= scenario.horizon(); ++t) {
    for (std::uint64_t code = 0; code < table.shape().code_space(t); ++code) {
      if (t < scenario.horizon() && blank(rng)) {
        table.set(t, code, Decision::blank());
      } else {
        table.set(t, code, Decision::stop(uniform_int(rng, 0, m - 1)));
      }
    }
  }
  return table;
}

inline TabularProfile random_profile(std::mt19937_64& rng, const Scenario& scenario, double blank_bias = 0.5) {
  TabularProfile profile;
  for (int j = 0; j < scenario.sensor_count(); ++j) profile.push_back(random_tabular(rng, scenario, j, blank_bias));
  return profile;
}

/// Calls visit(history) for every private history of `sensor` with positive
/// probability while the sensor stays blank.
template <class Visit>
void for_each_positive_history(const Scenario& scenario, const TabularProfile& profile, int sensor, Visit&& visit) {
  const HistoryShape shape = history_shape(scenario, sensor);
  for (int t = 1; t <= scenario.horizon(); ++t) {
    const SystemMap map(scenario, profile, sensor, t - 1);
    for (std::uint64_t code = 0; code < shape.code_space(t); ++code) {
      const PrivateHistory history = shape.decode(sensor, t, code);
      try {
        (void)posterior_from_history(map, history);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::kZeroProbabilityHistory) continue;
        throw;
      }
      visit(history);
    }
  }
}

}  // namespace sigdet::testing
