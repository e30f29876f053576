#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sigdet/decision.hpp"
#include "sigdet/error.hpp"
#include "sigdet/history.hpp"
#include "sigdet/numeric.hpp"

namespace sigdet {

/// History-based decision rule stored as one dense table per time step.
///
/// Histories that were never assigned fall back to blank before the horizon
/// and to stop-0 at the horizon, so every table is a total rule.
class TabularStrategy {
 public:
  TabularStrategy() = default;

  explicit TabularStrategy(HistoryShape shape) : shape_(shape), table_(shape.horizon()) {
    for (int t = 1; t <= shape_.horizon(); ++t) table_[t - 1].assign(shape_.code_space(t), kUnset);
  }

  const HistoryShape& shape() const { return shape_; }
  int horizon() const { return shape_.horizon(); }

  static Decision default_decision(int t, int horizon) {
    return t < horizon ? Decision::blank() : Decision::stop(0);
  }

  void set(int t, std::uint64_t code, Decision d) {
    if (d.value() >= shape_.message_alphabet()) {
      throw Error(ErrorKind::kParameterOutOfRange, "decision outside the message alphabet");
    }
    table_.at(t - 1).at(code) = static_cast<std::int8_t>(d.value());
  }
  void set(const PrivateHistory& history, Decision d) { set(history.time(), shape_.encode(history), d); }

  /// Removes an entry so the default applies again.
  void clear(int t, std::uint64_t code) { table_.at(t - 1).at(code) = kUnset; }

  std::optional<Decision> find(int t, std::uint64_t code) const {
    const auto v = table_[t - 1][code];
    if (v == kUnset) return std::nullopt;
    return v < 0 ? Decision::blank() : Decision::stop(v);
  }

  /// Throws BlankAtHorizon if an explicit entry asks to continue at t = T.
  Decision decide(int t, std::uint64_t code) const {
    const auto v = table_[t - 1][code];
    if (v == kUnset) return default_decision(t, shape_.horizon());
    if (v < 0) {
      if (t == shape_.horizon()) {
        throw Error(ErrorKind::kBlankAtHorizon, "tabular rule continues at the horizon (t=" + std::to_string(t) + ")");
      }
      return Decision::blank();
    }
    return Decision::stop(v);
  }
  Decision decide(const PrivateHistory& history) const { return decide(history.time(), shape_.encode(history)); }

  std::size_t entry_count() const {
    std::size_t count = 0;
    for (const auto& step : table_) {
      for (auto v : step) count += (v != kUnset);
    }
    return count;
  }

  friend bool operator==(const TabularStrategy& a, const TabularStrategy& b) { return a.table_ == b.table_; }

 private:
  static constexpr std::int8_t kUnset = -2;
  HistoryShape shape_;
  std::vector<std::vector<std::int8_t>> table_;
};

/// Closed belief interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double pi, double tol = kBeliefTolerance) const { return pi >= lo - tol && pi <= hi + tol; }
};

/// Stop intervals for one (t, message history): stop[m] sends symbol m.
struct ThresholdRule {
  std::vector<std::optional<Interval>> stop;

  /// Binary convenience: stop-1 on one interval, stop-0 on another.
  static ThresholdRule binary(std::optional<Interval> stop1, std::optional<Interval> stop0) {
    return ThresholdRule{{stop0, stop1}};
  }
  static ThresholdRule always(int symbol, int message_alphabet) {
    ThresholdRule rule{std::vector<std::optional<Interval>>(message_alphabet)};
    rule.stop[symbol] = Interval{0.0, 1.0};
    return rule;
  }

  /// Membership is closed; stop-1 is tested first, then stop-0, then 2..M-1.
  std::optional<int> match(double pi, double tol = kBeliefTolerance) const {
    auto hit = [&](std::size_t m) { return m < stop.size() && stop[m] && stop[m]->contains(pi, tol); };
    if (hit(1)) return 1;
    if (hit(0)) return 0;
    for (std::size_t m = 2; m < stop.size(); ++m) {
      if (hit(m)) return static_cast<int>(m);
    }
    return std::nullopt;
  }

  /// True if the stop intervals cover all of [0,1].
  bool covers_unit_interval() const {
    std::vector<Interval> parts;
    for (const auto& s : stop) {
      if (s) parts.push_back(*s);
    }
    std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    double reach = 0.0;
    for (const auto& part : parts) {
      if (part.lo > reach + kBeliefTolerance) return false;
      reach = std::max(reach, part.hi);
    }
    return reach >= 1.0 - kBeliefTolerance;
  }
};

/// Rule over the information state (pi, received messages): per time step,
/// interval rules keyed by the exact received message history, with an
/// optional per-step rule for histories that are not listed.
class ThresholdStrategy {
 public:
  /// What to do for a message history with no rule at all.
  enum class OffPath {
    kDefault,   ///< blank before the horizon, stop-0 at the horizon
    kStopZero,  ///< stop-0 immediately
  };

  ThresholdStrategy() = default;
  ThresholdStrategy(int horizon, int message_alphabet, OffPath off_path = OffPath::kDefault)
      : horizon_(horizon), message_alphabet_(message_alphabet), off_path_(off_path), rules_(horizon), fallback_(horizon) {}

  int horizon() const { return horizon_; }
  int message_alphabet() const { return message_alphabet_; }
  OffPath off_path() const { return off_path_; }

  void set_rule(int t, const MessageHistory& received, ThresholdRule rule) {
    check(t, rule);
    if (static_cast<int>(received.size()) != t - 1) {
      throw Error(ErrorKind::kParameterOutOfRange, "rule at time t must be keyed by t-1 message steps");
    }
    rules_[t - 1][message_history_key(received)] = {received, std::move(rule)};
  }
  void set_default_rule(int t, ThresholdRule rule) {
    check(t, rule);
    fallback_[t - 1] = std::move(rule);
  }

  const ThresholdRule* rule(int t, const MessageHistory& received) const {
    const auto& step = rules_.at(t - 1);
    if (auto it = step.find(message_history_key(received)); it != step.end()) return &it->second.second;
    if (fallback_[t - 1]) return &*fallback_[t - 1];
    return nullptr;
  }

  /// All explicitly keyed rules at time t.
  std::vector<std::pair<MessageHistory, ThresholdRule>> rules_at(int t) const {
    std::vector<std::pair<MessageHistory, ThresholdRule>> out;
    for (const auto& [key, entry] : rules_.at(t - 1)) out.push_back(entry);
    return out;
  }
  const std::optional<ThresholdRule>& default_rule(int t) const { return fallback_.at(t - 1); }

  Decision decide(int t, const MessageHistory& received, double pi) const {
    const ThresholdRule* r = rule(t, received);
    if (r == nullptr) {
      if (off_path_ == OffPath::kStopZero) return Decision::stop(0);
      return TabularStrategy::default_decision(t, horizon_);
    }
    if (auto m = r->match(pi)) return Decision::stop(*m);
    if (t == horizon_) {
      throw Error(ErrorKind::kBlankAtHorizon, "threshold rule leaves pi=" + format_double(pi) +
                                                  " uncovered at the horizon");
    }
    return Decision::blank();
  }

 private:
  void check(int t, const ThresholdRule& rule) const {
    if (t < 1 || t > horizon_) throw Error(ErrorKind::kParameterOutOfRange, "rule time outside 1..T");
    if (static_cast<int>(rule.stop.size()) > message_alphabet_) {
      throw Error(ErrorKind::kParameterOutOfRange, "rule names more stop symbols than the message alphabet has");
    }
    std::vector<Interval> parts;
    for (const auto& s : rule.stop) {
      if (!s) continue;
      if (!(s->lo >= 0.0 && s->hi <= 1.0 && s->lo <= s->hi)) {
        throw Error(ErrorKind::kParameterOutOfRange, "stop interval must satisfy 0 <= lo <= hi <= 1");
      }
      parts.push_back(*s);
    }
    // Closed intervals may touch at an endpoint but must not overlap.
    for (std::size_t a = 0; a < parts.size(); ++a) {
      for (std::size_t b = a + 1; b < parts.size(); ++b) {
        const double overlap = std::min(parts[a].hi, parts[b].hi) - std::max(parts[a].lo, parts[b].lo);
        if (overlap > kBeliefTolerance) {
          throw Error(ErrorKind::kParameterOutOfRange, "stop intervals overlap");
        }
      }
    }
  }

  int horizon_ = 1;
  int message_alphabet_ = 2;
  OffPath off_path_ = OffPath::kDefault;
  std::vector<std::map<std::vector<int>, std::pair<MessageHistory, ThresholdRule>>> rules_;
  std::vector<std::optional<ThresholdRule>> fallback_;
};

using Strategy = std::variant<TabularStrategy, ThresholdStrategy>;
/// One strategy per sensor, any mix of representations.
using StrategyProfile = std::vector<Strategy>;
/// Profile in which every rule is an explicit history table.
using TabularProfile = std::vector<TabularStrategy>;

/// A profile where every sensor uses the default rule (never stop early, declare 0 at T).
inline TabularProfile default_profile(const Scenario& scenario) {
  TabularProfile profile;
  for (int j = 0; j < scenario.sensor_count(); ++j) profile.emplace_back(history_shape(scenario, j));
  return profile;
}

}  // namespace sigdet
