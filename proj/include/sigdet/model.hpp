#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sigdet/decision.hpp"
#include "sigdet/error.hpp"
#include "sigdet/numeric.hpp"

namespace sigdet {

// Sensors are indexed 0..N-1 and time steps 1..T throughout the library.

inline constexpr double kPmfTolerance = 1e-12;

/// Finite conditional observation pmfs f^i_t(y | h).
class ObservationModel {
 public:
  /// table[sensor][t-1][h][y]
  using Table = std::vector<std::vector<std::array<std::vector<double>, 2>>>;

  ObservationModel() = default;

  explicit ObservationModel(Table table) : table_(std::move(table)) {
    if (table_.empty()) throw Error(ErrorKind::kParameterOutOfRange, "no sensors in observation model");
    const std::size_t horizon = table_.front().size();
    if (horizon == 0) throw Error(ErrorKind::kParameterOutOfRange, "observation model has no time steps");
    for (std::size_t i = 0; i < table_.size(); ++i) {
      if (table_[i].size() != horizon) {
        throw Error(ErrorKind::kParameterOutOfRange,
                    "sensor " + std::to_string(i + 1) + " has pmfs for " + std::to_string(table_[i].size()) +
                        " time steps, expected " + std::to_string(horizon));
      }
      const std::size_t alphabet = table_[i].front()[0].size();
      if (alphabet == 0) {
        throw Error(ErrorKind::kParameterOutOfRange, "sensor " + std::to_string(i + 1) + " has an empty alphabet");
      }
      for (std::size_t t = 0; t < horizon; ++t) {
        for (int h = 0; h < 2; ++h) {
          const auto& row = table_[i][t][h];
          if (row.size() != alphabet) {
            throw Error(ErrorKind::kParameterOutOfRange,
                        "sensor " + std::to_string(i + 1) + " changes alphabet size at t=" + std::to_string(t + 1));
          }
          double sum = 0.0;
          for (double p : row) {
            if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
              throw Error(ErrorKind::kPmfNotNormalized, "probability outside [0,1] for sensor " +
                                                            std::to_string(i + 1) + " at t=" + std::to_string(t + 1));
            }
            sum += p;
          }
          if (std::abs(sum - 1.0) > kPmfTolerance) {
            throw Error(ErrorKind::kPmfNotNormalized,
                        "pmf of sensor " + std::to_string(i + 1) + " at t=" + std::to_string(t + 1) +
                            " given H=" + std::to_string(h) + " sums to " + format_double(sum));
          }
        }
      }
    }
  }

  int sensor_count() const { return static_cast<int>(table_.size()); }
  int horizon() const { return table_.empty() ? 0 : static_cast<int>(table_.front().size()); }
  int alphabet_size(int sensor) const { return static_cast<int>(table_.at(sensor).front()[0].size()); }

  double prob(int sensor, int t, int h, int y) const { return table_[sensor][t - 1][h][y]; }
  const std::vector<double>& row(int sensor, int t, int h) const { return table_.at(sensor).at(t - 1).at(h); }
  const Table& table() const { return table_; }

 private:
  Table table_;
};

/// Directed communication graph; an edge (j, i) means i observes j's decisions.
class CommGraph {
 public:
  CommGraph() = default;

  CommGraph(int sensors, std::vector<std::pair<int, int>> edges)
      : size_(sensors), edges_(std::move(edges)), predecessors_(sensors), successors_(sensors) {
    if (sensors < 1) throw Error(ErrorKind::kGraphInconsistent, "graph needs at least one sensor");
    std::sort(edges_.begin(), edges_.end());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const auto [from, to] = edges_[e];
      if (from < 0 || from >= sensors || to < 0 || to >= sensors) {
        throw Error(ErrorKind::kGraphInconsistent, "edge (" + std::to_string(from + 1) + "," +
                                                       std::to_string(to + 1) + ") references an unknown sensor");
      }
      if (from == to) throw Error(ErrorKind::kGraphInconsistent, "self-loop at sensor " + std::to_string(from + 1));
      if (e > 0 && edges_[e - 1] == edges_[e]) {
        throw Error(ErrorKind::kGraphInconsistent, "duplicate edge (" + std::to_string(from + 1) + "," +
                                                       std::to_string(to + 1) + ")");
      }
      predecessors_[to].push_back(from);
      successors_[from].push_back(to);
    }
    for (auto& p : predecessors_) std::sort(p.begin(), p.end());
    for (auto& c : successors_) std::sort(c.begin(), c.end());
  }

  int size() const { return size_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& predecessors(int sensor) const { return predecessors_.at(sensor); }
  const std::vector<int>& successors(int sensor) const { return successors_.at(sensor); }

 private:
  int size_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> predecessors_;
  std::vector<std::vector<int>> successors_;
};

// ---------------------------------------------------------------------------
// Costs

/// O = sum_i c^i tau^i.
struct LinearOperationalCost {
  std::vector<double> per_sensor;
};

/// O = sum_t c(A_t); by_mask[m] is the cost of active set m (bit j = sensor j).
struct ActiveSetOperationalCost {
  std::vector<double> by_mask;
};

using OperationalCost = std::variant<LinearOperationalCost, ActiveSetOperationalCost>;

/// a(H, U) = mu 1{U != H} applied to the sensor that stops last; ties go to the
/// lowest-indexed sensor among the last stoppers.
struct LastStopperTerminalCost {
  double mu = 0.0;
};

/// Terminal cost depends only on the designated sensor's decision: cost[h][u].
struct FusionSensorTerminalCost {
  int sensor = 0;
  std::array<std::vector<double>, 2> cost;
};

/// Explicit table over (h, u^1..u^N) and, when depends_on_times, (tau^1..tau^N).
/// Index: h, then each u^j (radix M), then each tau^j - 1 (radix T).
struct TableTerminalCost {
  std::vector<double> table;
  bool depends_on_times = false;
};

using TerminalCost = std::variant<LastStopperTerminalCost, FusionSensorTerminalCost, TableTerminalCost>;

struct CostSpec {
  OperationalCost operational;
  TerminalCost terminal;
};

struct CostBreakdown {
  double operational = 0.0;
  double terminal = 0.0;
  double total() const { return operational + terminal; }
};

/// Final state of one sensor: its stopping time (1..T) and stop decision.
struct SensorOutcome {
  int sensor = 0;
  int stop_time = 0;
  Decision decision;
};

/// One entry per sensor, indexed by sensor id.
using StoppingOutcome = std::vector<SensorOutcome>;

inline std::size_t terminal_table_size(int sensors, int message_alphabet, int horizon, bool depends_on_times) {
  std::size_t size = 2;
  for (int j = 0; j < sensors; ++j) size *= static_cast<std::size_t>(message_alphabet);
  if (depends_on_times) {
    for (int j = 0; j < sensors; ++j) size *= static_cast<std::size_t>(horizon);
  }
  return size;
}

/// Bit mask of sensors active at time t, i.e. with tau^j >= t.
inline std::uint32_t active_set(std::span<const int> stop_times, int t) {
  std::uint32_t mask = 0;
  for (std::size_t j = 0; j < stop_times.size(); ++j) {
    if (stop_times[j] >= t) mask |= (1u << j);
  }
  return mask;
}

// ---------------------------------------------------------------------------

/// Full problem instance.
class Scenario {
 public:
  Scenario() = default;

  Scenario(double prior, int horizon, int message_alphabet, ObservationModel observations, CommGraph graph,
           CostSpec costs)
      : prior_(prior),
        horizon_(horizon),
        message_alphabet_(message_alphabet),
        observations_(std::move(observations)),
        graph_(std::move(graph)),
        costs_(std::move(costs)) {
    if (!(prior_ > 0.0 && prior_ < 1.0)) {
      throw Error(ErrorKind::kInvalidPrior, "prior P(H=0) must lie in (0,1), got " + format_double(prior_));
    }
    if (horizon_ < 1) throw Error(ErrorKind::kParameterOutOfRange, "horizon must be >= 1");
    if (message_alphabet_ < 2) throw Error(ErrorKind::kParameterOutOfRange, "message alphabet must have >= 2 symbols");
    if (observations_.horizon() != horizon_) {
      throw Error(ErrorKind::kParameterOutOfRange, "observation model covers " +
                                                       std::to_string(observations_.horizon()) +
                                                       " steps but horizon is " + std::to_string(horizon_));
    }
    const int n = observations_.sensor_count();
    if (graph_.size() != n) {
      throw Error(ErrorKind::kGraphInconsistent, "graph has " + std::to_string(graph_.size()) +
                                                     " sensors, observation model has " + std::to_string(n));
    }
    if (n > 20) throw Error(ErrorKind::kParameterOutOfRange, "at most 20 sensors are supported");
    validate_costs();
  }

  double prior() const { return prior_; }
  /// P(H = h).
  double prior_of(int h) const { return h == 0 ? prior_ : 1.0 - prior_; }
  int horizon() const { return horizon_; }
  int message_alphabet() const { return message_alphabet_; }
  int sensor_count() const { return observations_.sensor_count(); }
  const ObservationModel& observations() const { return observations_; }
  const CommGraph& graph() const { return graph_; }
  const CostSpec& costs() const { return costs_; }

 private:
  void validate_costs() const {
    const int n = sensor_count();
    auto check_value = [](double v, const char* what) {
      if (!std::isfinite(v) || v < 0.0) {
        throw Error(ErrorKind::kParameterOutOfRange, std::string(what) + " must be finite and >= 0");
      }
    };
    if (const auto* linear = std::get_if<LinearOperationalCost>(&costs_.operational)) {
      if (static_cast<int>(linear->per_sensor.size()) != n) {
        throw Error(ErrorKind::kCostTableIncomplete, "linear operational cost needs one rate per sensor");
      }
      for (double c : linear->per_sensor) check_value(c, "operational cost");
    } else {
      const auto& table = std::get<ActiveSetOperationalCost>(costs_.operational);
      if (table.by_mask.size() != (std::size_t{1} << n)) {
        throw Error(ErrorKind::kCostTableIncomplete, "active-set cost needs an entry for every subset of sensors (" +
                                                         std::to_string(std::size_t{1} << n) + " entries)");
      }
      for (double c : table.by_mask) check_value(c, "active-set cost");
    }
    std::visit(
        [&](const auto& terminal) {
          using T = std::decay_t<decltype(terminal)>;
          if constexpr (std::is_same_v<T, LastStopperTerminalCost>) {
            check_value(terminal.mu, "mu");
          } else if constexpr (std::is_same_v<T, FusionSensorTerminalCost>) {
            if (terminal.sensor < 0 || terminal.sensor >= n) {
              throw Error(ErrorKind::kParameterOutOfRange, "fusion sensor out of range");
            }
            for (const auto& row : terminal.cost) {
              if (static_cast<int>(row.size()) != message_alphabet_) {
                throw Error(ErrorKind::kCostTableIncomplete, "fusion cost needs one entry per message symbol");
              }
              for (double c : row) check_value(c, "terminal cost");
            }
          } else {
            const auto expected = terminal_table_size(n, message_alphabet_, horizon_, terminal.depends_on_times);
            if (terminal.table.size() != expected) {
              throw Error(ErrorKind::kCostTableIncomplete, "terminal table has " +
                                                               std::to_string(terminal.table.size()) +
                                                               " entries, expected " + std::to_string(expected));
            }
            for (double c : terminal.table) check_value(c, "terminal cost");
          }
        },
        costs_.terminal);
  }

  double prior_ = 0.5;
  int horizon_ = 1;
  int message_alphabet_ = 2;
  ObservationModel observations_;
  CommGraph graph_;
  CostSpec costs_;
};

// ---------------------------------------------------------------------------
// Cost evaluation

/// Operational and terminal cost of one realised trajectory. Per-sensor
/// outcomes may arrive in any order; each sensor must appear exactly once.
inline CostBreakdown total_cost(const Scenario& scenario, int h, std::span<const SensorOutcome> outcomes) {
  const int n = scenario.sensor_count();
  const int horizon = scenario.horizon();
  const int m = scenario.message_alphabet();
  if (static_cast<int>(outcomes.size()) != n) {
    throw Error(ErrorKind::kParameterOutOfRange, "expected one outcome per sensor");
  }
  // Small fixed buffers keep this allocation-free; Scenario caps N at 20.
  std::array<int, 20> times{};
  std::array<int, 20> decisions{};
  std::array<bool, 20> seen{};
  for (const auto& o : outcomes) {
    if (o.sensor < 0 || o.sensor >= n || seen[o.sensor]) {
      throw Error(ErrorKind::kParameterOutOfRange, "outcome list must name each sensor exactly once");
    }
    if (o.stop_time < 1 || o.stop_time > horizon || o.decision.value() < 0 || o.decision.value() >= m) {
      throw Error(ErrorKind::kParameterOutOfRange, "outcome of sensor " + std::to_string(o.sensor + 1) +
                                                       " has invalid stopping time or decision");
    }
    seen[o.sensor] = true;
    times[o.sensor] = o.stop_time;
    decisions[o.sensor] = o.decision.value();
  }

  CostBreakdown cost;
  if (const auto* linear = std::get_if<LinearOperationalCost>(&scenario.costs().operational)) {
    for (int j = 0; j < n; ++j) cost.operational += linear->per_sensor[j] * times[j];
  } else {
    const auto& table = std::get<ActiveSetOperationalCost>(scenario.costs().operational);
    for (int t = 1; t <= horizon; ++t) {
      cost.operational += table.by_mask[active_set(std::span<const int>(times.data(), n), t)];
    }
  }

  cost.terminal = std::visit(
      [&](const auto& terminal) -> double {
        using T = std::decay_t<decltype(terminal)>;
        if constexpr (std::is_same_v<T, LastStopperTerminalCost>) {
          int last = 0;
          for (int j = 1; j < n; ++j) {
            if (times[j] > times[last]) last = j;
          }
          return decisions[last] == h ? 0.0 : terminal.mu;
        } else if constexpr (std::is_same_v<T, FusionSensorTerminalCost>) {
          return terminal.cost[h][decisions[terminal.sensor]];
        } else {
          std::size_t index = static_cast<std::size_t>(h);
          for (int j = 0; j < n; ++j) index = index * m + decisions[j];
          if (terminal.depends_on_times) {
            for (int j = 0; j < n; ++j) index = index * horizon + (times[j] - 1);
          }
          return terminal.table[index];
        }
      },
      scenario.costs().terminal);
  return cost;
}

/// Largest operational cost over all stopping-time vectors.
inline double max_operational_cost(const OperationalCost& operational, int sensors, int horizon) {
  if (const auto* linear = std::get_if<LinearOperationalCost>(&operational)) {
    double total = 0.0;
    for (double c : linear->per_sensor) total += c * horizon;
    return total;
  }
  const auto& table = std::get<ActiveSetOperationalCost>(operational);
  std::vector<int> times(sensors, 1);
  double best = 0.0;
  while (true) {
    double cost = 0.0;
    for (int t = 1; t <= horizon; ++t) cost += table.by_mask[active_set(times, t)];
    best = std::max(best, cost);
    int j = 0;
    while (j < sensors && ++times[j] > horizon) times[j++] = 1;
    if (j == sensors) break;
  }
  return best;
}

/// Error cost used when a config leaves mu unspecified: large enough that any
/// rule making a mistake with noticeable probability is dominated.
inline double default_mu(const OperationalCost& operational, int sensors, int horizon) {
  return 100.0 * max_operational_cost(operational, sensors, horizon);
}

// ---------------------------------------------------------------------------
// Builders

/// Two-sensor, three-step instance in which a signaling (non two-threshold)
/// rule for sensor 2 beats every two-threshold rule when r1 < 2/3.
inline Scenario counterexample_scenario(double K, double r1, std::optional<double> mu = std::nullopt) {
  if (!(K > 1.0 && K < 2.0)) throw Error(ErrorKind::kParameterOutOfRange, "K must lie in (1,2)");
  if (!(r1 > 0.0 && r1 < 1.0)) throw Error(ErrorKind::kParameterOutOfRange, "r1 must lie in (0,1)");
  if (mu && !(*mu > 0.0 && std::isfinite(*mu))) throw Error(ErrorKind::kParameterOutOfRange, "mu must be > 0");

  constexpr int kHorizon = 3;
  // Sensor 1: y in {0,1}, f(y=h|h) = q_t with q = (1/2, 1/2, 1).
  const std::array<double, 3> q = {0.5, 0.5, 1.0};
  // Sensor 2: y in {0,1,2}; y=0 only under H=0, y=2 only under H=1, with r = (r1, 0, 0).
  const std::array<double, 3> r = {r1, 0.0, 0.0};

  ObservationModel::Table table(2);
  for (int t = 0; t < kHorizon; ++t) {
    table[0].push_back({std::vector<double>{q[t], 1.0 - q[t]}, std::vector<double>{1.0 - q[t], q[t]}});
    table[1].push_back(
        {std::vector<double>{r[t], 1.0 - r[t], 0.0}, std::vector<double>{0.0, 1.0 - r[t], r[t]}});
  }
  ActiveSetOperationalCost operational{{0.0, 1.0, 1.0, K}};
  const double error_cost = mu ? *mu : default_mu(operational, 2, kHorizon);
  return Scenario(0.5, kHorizon, 2, ObservationModel(std::move(table)), CommGraph(2, {{0, 1}, {1, 0}}),
                  CostSpec{operational, LastStopperTerminalCost{error_cost}});
}

enum class SpecialCase { kNoCommunication, kOneWay, kTwoWay };

struct SpecialCaseParams {
  double prior = 0.5;
  int message_alphabet = 2;
  ObservationModel::Table pmf;
  /// c^i, one per sensor.
  std::vector<double> unit_costs;
  std::optional<double> mu;
  /// No-communication only: explicit A(h, u^1..u^N) table. Defaults to
  /// mu times the number of sensors whose decision differs from h.
  std::optional<std::vector<double>> decision_table;
};

/// Symmetric pmfs with P(Y = h | H = h) = accuracy over a binary alphabet.
inline ObservationModel::Table binary_symmetric_pmfs(int sensors, int horizon, double accuracy) {
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) throw Error(ErrorKind::kParameterOutOfRange, "accuracy must be in [0,1]");
  ObservationModel::Table table(sensors);
  for (auto& sensor : table) {
    for (int t = 0; t < horizon; ++t) {
      sensor.push_back({std::vector<double>{accuracy, 1.0 - accuracy}, std::vector<double>{1.0 - accuracy, accuracy}});
    }
  }
  return table;
}

inline Scenario special_case_scenario(SpecialCase kind, const SpecialCaseParams& params) {
  ObservationModel observations(params.pmf);
  const int n = observations.sensor_count();
  const int horizon = observations.horizon();
  const int m = params.message_alphabet;
  if (static_cast<int>(params.unit_costs.size()) != n) {
    throw Error(ErrorKind::kParameterOutOfRange, "special case needs one unit cost per sensor");
  }
  if (m < 2) throw Error(ErrorKind::kParameterOutOfRange, "message alphabet must have >= 2 symbols");
  if (params.mu && !(*params.mu > 0.0)) throw Error(ErrorKind::kParameterOutOfRange, "mu must be > 0");
  LinearOperationalCost operational{params.unit_costs};
  const double mu = params.mu ? *params.mu : default_mu(operational, n, horizon);

  switch (kind) {
    case SpecialCase::kNoCommunication: {
      TableTerminalCost terminal;
      if (params.decision_table) {
        terminal.table = *params.decision_table;
      } else {
        terminal.table.resize(terminal_table_size(n, m, horizon, false));
        for (std::size_t index = 0; index < terminal.table.size(); ++index) {
          // Decode h and u^1..u^N from the mixed-radix index.
          std::size_t rest = index;
          int wrong = 0;
          std::vector<int> u(n);
          for (int j = n - 1; j >= 0; --j) {
            u[j] = static_cast<int>(rest % m);
            rest /= m;
          }
          const int h = static_cast<int>(rest);
          for (int j = 0; j < n; ++j) wrong += (u[j] != h);
          terminal.table[index] = mu * wrong;
        }
      }
      return Scenario(params.prior, horizon, m, std::move(observations), CommGraph(n, {}),
                      CostSpec{operational, terminal});
    }
    case SpecialCase::kOneWay: {
      std::vector<std::pair<int, int>> edges;
      for (int j = 1; j < n; ++j) edges.emplace_back(j, 0);
      FusionSensorTerminalCost terminal{0, {}};
      for (int h = 0; h < 2; ++h) {
        terminal.cost[h].assign(m, mu);
        terminal.cost[h][h] = 0.0;
      }
      return Scenario(params.prior, horizon, m, std::move(observations), CommGraph(n, std::move(edges)),
                      CostSpec{operational, terminal});
    }
    case SpecialCase::kTwoWay: {
      if (n != 2) throw Error(ErrorKind::kParameterOutOfRange, "two-way communication needs exactly 2 sensors");
      return Scenario(params.prior, horizon, m, std::move(observations), CommGraph(2, {{0, 1}, {1, 0}}),
                      CostSpec{operational, LastStopperTerminalCost{mu}});
    }
  }
  throw Error(ErrorKind::kParameterOutOfRange, "unknown special case");
}

}  // namespace sigdet
