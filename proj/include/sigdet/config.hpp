#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigdet/decision.hpp"
#include "sigdet/error.hpp"
#include "sigdet/history.hpp"
#include "sigdet/model.hpp"
#include "sigdet/numeric.hpp"
#include "sigdet/profile.hpp"
#include "sigdet/strategy.hpp"

// JSON documents for scenarios and strategies. Sensors are numbered from 1 in
// every document and from 0 in the library.

namespace sigdet::config {

using Json = nlohmann::json;

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kConfig, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kConfig, "'" + path + "' is not valid JSON: " + e.what());
  }
}

namespace detail {

inline const Json& require(const Json& node, const char* key, const std::string& where) {
  if (!node.is_object() || !node.contains(key)) {
    throw Error(ErrorKind::kConfig, where + ": missing field '" + key + "'");
  }
  return node.at(key);
}

inline double number(const Json& node, const std::string& where) {
  if (node.is_number()) return node.get<double>();
  if (node.is_string()) return parse_probability_text(node.get<std::string>());
  throw Error(ErrorKind::kConfig, where + ": expected a number or \"a/b\" string");
}

inline int integer(const Json& node, const std::string& where) {
  if (!node.is_number_integer()) throw Error(ErrorKind::kConfig, where + ": expected an integer");
  return node.get<int>();
}

inline double number_or(const Json& node, const char* key, double fallback, const std::string& where) {
  return node.contains(key) ? number(node.at(key), where + "." + key) : fallback;
}

inline std::optional<double> optional_number(const Json& node, const char* key, const std::string& where) {
  if (!node.contains(key) || node.at(key).is_null()) return std::nullopt;
  return number(node.at(key), where + "." + key);
}

inline std::vector<double> number_list(const Json& node, const std::string& where) {
  if (!node.is_array()) throw Error(ErrorKind::kConfig, where + ": expected an array");
  std::vector<double> out;
  for (std::size_t k = 0; k < node.size(); ++k) out.push_back(number(node[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

/// "b" or a stop symbol.
inline Decision decision(const Json& node, const std::string& where) {
  if (node.is_string()) {
    const auto text = node.get<std::string>();
    if (text == "b" || text == "blank") return Decision::blank();
    try {
      std::size_t used = 0;
      const int v = std::stoi(text, &used);
      if (used == text.size() && v >= 0) return Decision::stop(v);
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::kConfig, where + ": unknown decision '" + text + "'");
  }
  if (node.is_number_integer() && node.get<int>() >= 0) return Decision::stop(node.get<int>());
  throw Error(ErrorKind::kConfig, where + ": expected \"b\" or a non-negative integer");
}

inline MessageHistory message_history(const Json& node, const std::string& where) {
  if (!node.is_array()) throw Error(ErrorKind::kConfig, where + ": expected a list of message steps");
  MessageHistory out;
  for (std::size_t s = 0; s < node.size(); ++s) {
    const auto step_where = where + "[" + std::to_string(s) + "]";
    MessageVector step;
    if (node[s].is_array()) {
      for (std::size_t k = 0; k < node[s].size(); ++k) step.push_back(decision(node[s][k], step_where));
    } else {
      step.push_back(decision(node[s], step_where));
    }
    out.push_back(std::move(step));
  }
  return out;
}

inline ObservationModel::Table pmf_table(const Json& sensors, const std::string& where) {
  if (!sensors.is_array() || sensors.empty()) throw Error(ErrorKind::kConfig, where + ": expected a non-empty array");
  ObservationModel::Table table;
  for (std::size_t j = 0; j < sensors.size(); ++j) {
    const auto sensor_where = where + "[" + std::to_string(j) + "]";
    const Json& pmf = require(sensors[j], "pmf", sensor_where);
    if (!pmf.is_array()) throw Error(ErrorKind::kConfig, sensor_where + ".pmf: expected pmf[t][h][y]");
    std::vector<std::array<std::vector<double>, 2>> steps;
    for (std::size_t t = 0; t < pmf.size(); ++t) {
      const auto step_where = sensor_where + ".pmf[" + std::to_string(t) + "]";
      if (!pmf[t].is_array() || pmf[t].size() != 2) {
        throw Error(ErrorKind::kConfig, step_where + ": expected one row per hypothesis");
      }
      steps.push_back({number_list(pmf[t][0], step_where + "[0]"), number_list(pmf[t][1], step_where + "[1]")});
    }
    table.push_back(std::move(steps));
  }
  return table;
}

/// Active-set table given either as a full by_mask list or as a map from a
/// comma-separated list of sensors ("" for the empty set) to its cost.
inline std::vector<double> active_set_table(const Json& params, int sensors, const std::string& where) {
  if (params.contains("by_mask")) return number_list(params.at("by_mask"), where + ".by_mask");
  const Json& table = require(params, "table", where);
  if (!table.is_object()) throw Error(ErrorKind::kConfig, where + ".table: expected an object");
  const std::size_t size = std::size_t{1} << sensors;
  std::vector<double> by_mask(size, -1.0);
  for (const auto& [key, value] : table.items()) {
    std::uint32_t mask = 0;
    std::stringstream in(key);
    std::string item;
    while (std::getline(in, item, ',')) {
      if (item.find_first_not_of(' ') == std::string::npos) continue;
      int j = 0;
      try {
        j = std::stoi(item);
      } catch (const std::exception&) {
        throw Error(ErrorKind::kConfig, where + ".table: bad sensor list '" + key + "'");
      }
      if (j < 1 || j > sensors) throw Error(ErrorKind::kConfig, where + ".table: sensor " + item + " out of range");
      mask |= 1u << (j - 1);
    }
    by_mask[mask] = number(value, where + ".table[\"" + key + "\"]");
  }
  for (std::size_t m = 0; m < size; ++m) {
    if (by_mask[m] < 0.0) {
      throw Error(ErrorKind::kCostTableIncomplete, "active-set cost has no entry for sensor set mask " +
                                                       std::to_string(m));
    }
  }
  return by_mask;
}

inline OperationalCost operational_cost(const Json& node, int sensors) {
  const std::string where = "cost.operational";
  const auto form = require(node, "form", where).get<std::string>();
  const Json params = node.value("params", Json::object());
  if (form == "linear") {
    return LinearOperationalCost{number_list(require(params, "costs", where + ".params"), where + ".params.costs")};
  }
  if (form == "active-set") return ActiveSetOperationalCost{active_set_table(params, sensors, where + ".params")};
  throw Error(ErrorKind::kConfig, where + ": unknown form '" + form + "' (linear, active-set)");
}

inline TerminalCost terminal_cost(const Json& node, const OperationalCost& operational, int sensors, int horizon,
                                  int message_alphabet) {
  const std::string where = "cost.terminal";
  const auto form = require(node, "form", where).get<std::string>();
  const Json params = node.value("params", Json::object());
  const double fallback_mu = default_mu(operational, sensors, horizon);
  if (form == "last-stopper") return LastStopperTerminalCost{number_or(params, "mu", fallback_mu, where + ".params")};
  if (form == "fusion") {
    FusionSensorTerminalCost cost;
    cost.sensor = params.contains("sensor") ? integer(params.at("sensor"), where + ".params.sensor") - 1 : 0;
    if (params.contains("cost")) {
      const Json& rows = params.at("cost");
      if (!rows.is_array() || rows.size() != 2) {
        throw Error(ErrorKind::kConfig, where + ".params.cost: expected one row per hypothesis");
      }
      for (int h = 0; h < 2; ++h) cost.cost[h] = number_list(rows[h], where + ".params.cost");
    } else {
      const double mu = number_or(params, "mu", fallback_mu, where + ".params");
      for (int h = 0; h < 2; ++h) {
        cost.cost[h].assign(message_alphabet, mu);
        if (h < message_alphabet) cost.cost[h][h] = 0.0;
      }
    }
    return cost;
  }
  if (form == "table") {
    TableTerminalCost cost;
    cost.table = number_list(require(params, "table", where + ".params"), where + ".params.table");
    cost.depends_on_times = params.value("depends_on_times", false);
    return cost;
  }
  throw Error(ErrorKind::kConfig, where + ": unknown form '" + form + "' (last-stopper, fusion, table)");
}

inline SpecialCaseParams special_params(const Json& params, const std::string& where) {
  SpecialCaseParams out;
  out.prior = number_or(params, "prior", 0.5, where);
  out.message_alphabet = params.contains("message_alphabet")
                             ? integer(params.at("message_alphabet"), where + ".message_alphabet")
                             : 2;
  if (params.contains("sensors") && params.at("sensors").is_array()) {
    out.pmf = pmf_table(params.at("sensors"), where + ".sensors");
  } else {
    // Symmetric binary sensors: {"sensors": N, "horizon": T, "accuracy": q}.
    const int n = params.contains("sensors") ? integer(params.at("sensors"), where + ".sensors") : 2;
    const int horizon = params.contains("horizon") ? integer(params.at("horizon"), where + ".horizon") : 2;
    if (n < 1 || horizon < 1) throw Error(ErrorKind::kConfig, where + ": sensors and horizon must be >= 1");
    out.pmf = binary_symmetric_pmfs(n, horizon, number_or(params, "accuracy", 0.75, where));
  }
  if (params.contains("unit_costs")) {
    out.unit_costs = number_list(params.at("unit_costs"), where + ".unit_costs");
  } else {
    out.unit_costs.assign(out.pmf.size(), 1.0);
  }
  out.mu = optional_number(params, "mu", where);
  if (params.contains("decision_table")) out.decision_table = number_list(params.at("decision_table"), where);
  return out;
}

}  // namespace detail

/// Builds and validates a scenario document (inline or preset).
inline Scenario load_scenario(const Json& doc) {
  try {
    if (!doc.is_object()) throw Error(ErrorKind::kConfig, "scenario must be a JSON object");
    if (doc.contains("preset")) {
      const auto name = doc.at("preset").get<std::string>();
      const Json params = doc.value("params", Json::object());
      const std::string where = "params";
      if (name == "counterexample") {
        return counterexample_scenario(detail::number_or(params, "K", 1.5, where),
                                       detail::number_or(params, "r1", 0.4, where),
                                       detail::optional_number(params, "mu", where));
      }
      if (name == "no-comm") {
        return special_case_scenario(SpecialCase::kNoCommunication, detail::special_params(params, where));
      }
      if (name == "one-way") return special_case_scenario(SpecialCase::kOneWay, detail::special_params(params, where));
      if (name == "two-way") return special_case_scenario(SpecialCase::kTwoWay, detail::special_params(params, where));
      throw Error(ErrorKind::kConfig, "unknown scenario preset '" + name +
                                          "' (counterexample, no-comm, one-way, two-way)");
    }
    const double prior = detail::number(detail::require(doc, "prior", "scenario"), "prior");
    const int horizon = detail::integer(detail::require(doc, "horizon", "scenario"), "horizon");
    const int alphabet = doc.contains("message_alphabet") ? detail::integer(doc.at("message_alphabet"), "message_alphabet")
                                                          : 2;
    ObservationModel observations(detail::pmf_table(detail::require(doc, "sensors", "scenario"), "sensors"));
    const int n = observations.sensor_count();
    std::vector<std::pair<int, int>> edges;
    if (doc.contains("edges")) {
      for (const auto& e : doc.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw Error(ErrorKind::kConfig, "edges: expected [from, to] pairs");
        edges.emplace_back(detail::integer(e[0], "edges") - 1, detail::integer(e[1], "edges") - 1);
      }
    }
    const Json& cost = detail::require(doc, "cost", "scenario");
    const auto operational = detail::operational_cost(detail::require(cost, "operational", "cost"), n);
    const auto terminal =
        detail::terminal_cost(detail::require(cost, "terminal", "cost"), operational, n, horizon, alphabet);
    return Scenario(prior, horizon, alphabet, std::move(observations), CommGraph(n, std::move(edges)),
                    CostSpec{operational, terminal});
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("malformed scenario: ") + e.what());
  }
}

inline Scenario load_scenario_file(const std::string& path) { return load_scenario(read_json_file(path)); }

/// One sensor's strategy: {"type": "tabular" | "threshold" | "preset", ...}.
inline Strategy load_strategy(const Json& doc, const Scenario& scenario, int sensor) {
  try {
    const std::string where = "strategy of sensor " + std::to_string(sensor + 1);
    const auto type = detail::require(doc, "type", where).get<std::string>();
    if (type == "preset") {
      const auto profile = preset_strategies(detail::require(doc, "name", where).get<std::string>(), scenario);
      const int source = doc.contains("sensor") ? detail::integer(doc.at("sensor"), where + ".sensor") - 1 : sensor;
      if (source < 0 || source >= static_cast<int>(profile.size())) {
        throw Error(ErrorKind::kConfig, where + ": preset sensor out of range");
      }
      return profile[source];
    }
    if (type == "tabular") {
      const HistoryShape shape = history_shape(scenario, sensor);
      TabularStrategy table(shape);
      for (const auto& entry : doc.value("entries", Json::array())) {
        PrivateHistory history;
        history.sensor = sensor;
        for (const auto& y : detail::require(entry, "observations", where)) {
          history.observations.push_back(detail::integer(y, where + ".observations"));
        }
        history.messages = detail::message_history(entry.value("messages", Json::array()), where + ".messages");
        if (entry.contains("t") && detail::integer(entry.at("t"), where + ".t") != history.time()) {
          throw Error(ErrorKind::kConfig, where + ": entry time does not match its observation count");
        }
        table.set(history, detail::decision(detail::require(entry, "decision", where), where + ".decision"));
      }
      return table;
    }
    if (type == "threshold") {
      const auto off = doc.value("off_path", std::string("default"));
      ThresholdStrategy::OffPath off_path;
      if (off == "default") {
        off_path = ThresholdStrategy::OffPath::kDefault;
      } else if (off == "stop0") {
        off_path = ThresholdStrategy::OffPath::kStopZero;
      } else {
        throw Error(ErrorKind::kConfig, where + ": off_path must be \"default\" or \"stop0\"");
      }
      ThresholdStrategy rule(scenario.horizon(), scenario.message_alphabet(), off_path);
      for (const auto& r : doc.value("rules", Json::array())) {
        const int t = detail::integer(detail::require(r, "t", where), where + ".t");
        ThresholdRule intervals{std::vector<std::optional<Interval>>(scenario.message_alphabet())};
        auto set_interval = [&](int m, const Json& node) {
          const auto ends = detail::number_list(node, where + ".stop" + std::to_string(m));
          if (ends.size() != 2) throw Error(ErrorKind::kConfig, where + ": interval must be [lo, hi]");
          if (m < 0 || m >= scenario.message_alphabet()) {
            throw Error(ErrorKind::kConfig, where + ": stop symbol outside the message alphabet");
          }
          intervals.stop[m] = Interval{ends[0], ends[1]};
        };
        if (r.contains("stop0")) set_interval(0, r.at("stop0"));
        if (r.contains("stop1")) set_interval(1, r.at("stop1"));
        const Json stops = r.value("stops", Json::object());
        for (const auto& [key, node] : stops.items()) {
          int m = -1;
          try {
            m = std::stoi(key);
          } catch (const std::exception&) {
            throw Error(ErrorKind::kConfig, where + ": stop symbol '" + key + "' is not an integer");
          }
          set_interval(m, node);
        }
        const Json history = r.value("message_history", Json("*"));
        if (history.is_string() && history.get<std::string>() == "*") {
          rule.set_default_rule(t, std::move(intervals));
        } else {
          rule.set_rule(t, detail::message_history(history, where + ".message_history"), std::move(intervals));
        }
      }
      return rule;
    }
    throw Error(ErrorKind::kConfig, where + ": unknown strategy type '" + type + "' (tabular, threshold, preset)");
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("malformed strategy: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kParameterOutOfRange) throw Error(ErrorKind::kConfig, e.what());
    throw;
  }
}

/// {"preset": "ex1"} or {"strategies": [ ... one per sensor ... ]}.
inline StrategyProfile load_profile(const Json& doc, const Scenario& scenario) {
  try {
    if (doc.contains("preset")) return preset_strategies(doc.at("preset").get<std::string>(), scenario);
    const Json& list = detail::require(doc, "strategies", "profile");
    if (!list.is_array() || static_cast<int>(list.size()) != scenario.sensor_count()) {
      throw Error(ErrorKind::kConfig, "profile must list exactly one strategy per sensor");
    }
    StrategyProfile profile;
    for (int j = 0; j < scenario.sensor_count(); ++j) profile.push_back(load_strategy(list[j], scenario, j));
    return profile;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("malformed profile: ") + e.what());
  }
}

inline StrategyProfile load_profile_file(const std::string& path, const Scenario& scenario) {
  return load_profile(read_json_file(path), scenario);
}

}  // namespace sigdet::config
