#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sigdet/decision.hpp"
#include "sigdet/error.hpp"
#include "sigdet/model.hpp"

namespace sigdet {

/// What an active sensor knows at time t: its own observations y_{1:t} and
/// the messages u_{1:t-1} received from its predecessors.
struct PrivateHistory {
  int sensor = 0;
  std::vector<int> observations;
  MessageHistory messages;

  int time() const { return static_cast<int>(observations.size()); }
};

/// Mixed-radix encoding of one sensor's private histories. Digits are taken
/// time-ordered as y_1, u_1 (per predecessor), y_2, u_2, ..., y_t, so each
/// (t, code) pair identifies a history uniquely.
class HistoryShape {
 public:
  /// Larger code spaces are rejected instead of silently truncated.
  static constexpr std::uint64_t kMaxCodeSpace = std::uint64_t{1} << 32;

  HistoryShape() = default;
  HistoryShape(int horizon, int alphabet, int predecessors, int message_alphabet)
      : horizon_(horizon), alphabet_(alphabet), predecessors_(predecessors), message_alphabet_(message_alphabet) {
    for (int t = 1; t <= horizon_; ++t) (void)code_space(t);
  }

  int horizon() const { return horizon_; }
  int alphabet() const { return alphabet_; }
  int predecessors() const { return predecessors_; }
  int message_alphabet() const { return message_alphabet_; }

  std::uint64_t code_space(int t) const {
    std::uint64_t size = 1;
    auto grow = [&](std::uint64_t radix) {
      if (size > kMaxCodeSpace / radix) {
        throw Error(ErrorKind::kBudgetExceeded, "private-history space too large to tabulate");
      }
      size *= radix;
    };
    for (int s = 1; s <= t; ++s) {
      grow(static_cast<std::uint64_t>(alphabet_));
      if (s < t) {
        for (int k = 0; k < predecessors_; ++k) grow(static_cast<std::uint64_t>(message_alphabet_ + 1));
      }
    }
    return size;
  }

  /// Appends the messages of one time step to a running code.
  std::uint64_t push_messages(std::uint64_t code, const MessageVector& messages) const {
    for (Decision d : messages) code = code * (message_alphabet_ + 1) + static_cast<std::uint64_t>(d.digit());
    return code;
  }
  std::uint64_t push_observation(std::uint64_t code, int y) const {
    return code * alphabet_ + static_cast<std::uint64_t>(y);
  }

  std::uint64_t encode(const PrivateHistory& history) const {
    validate(history);
    std::uint64_t code = 0;
    for (int s = 1; s <= history.time(); ++s) {
      if (s > 1) code = push_messages(code, history.messages[s - 2]);
      code = push_observation(code, history.observations[s - 1]);
    }
    return code;
  }

  PrivateHistory decode(int sensor, int t, std::uint64_t code) const {
    PrivateHistory history;
    history.sensor = sensor;
    history.observations.assign(t, 0);
    history.messages.assign(t > 0 ? t - 1 : 0, MessageVector(predecessors_));
    for (int s = t; s >= 1; --s) {
      history.observations[s - 1] = static_cast<int>(code % alphabet_);
      code /= alphabet_;
      if (s > 1) {
        for (int k = predecessors_ - 1; k >= 0; --k) {
          history.messages[s - 2][k] = Decision::from_digit(static_cast<int>(code % (message_alphabet_ + 1)));
          code /= (message_alphabet_ + 1);
        }
      }
    }
    return history;
  }

  void validate(const PrivateHistory& history) const {
    const int t = history.time();
    if (t < 1 || t > horizon_) throw Error(ErrorKind::kParameterOutOfRange, "history time outside 1..T");
    if (static_cast<int>(history.messages.size()) != t - 1) {
      throw Error(ErrorKind::kParameterOutOfRange, "history at time t must carry t-1 message steps");
    }
    for (int y : history.observations) {
      if (y < 0 || y >= alphabet_) throw Error(ErrorKind::kParameterOutOfRange, "observation symbol out of range");
    }
    for (const auto& step : history.messages) {
      if (static_cast<int>(step.size()) != predecessors_) {
        throw Error(ErrorKind::kParameterOutOfRange, "message step must have one entry per predecessor");
      }
      for (Decision d : step) {
        if (d.value() >= message_alphabet_) throw Error(ErrorKind::kParameterOutOfRange, "message symbol out of range");
      }
    }
  }

 private:
  int horizon_ = 1;
  int alphabet_ = 1;
  int predecessors_ = 0;
  int message_alphabet_ = 2;
};

inline HistoryShape history_shape(const Scenario& scenario, int sensor) {
  return HistoryShape(scenario.horizon(), scenario.observations().alphabet_size(sensor),
                      static_cast<int>(scenario.graph().predecessors(sensor).size()), scenario.message_alphabet());
}

inline std::string format_history(const PrivateHistory& history) {
  std::string out = "y=";
  for (std::size_t s = 0; s < history.observations.size(); ++s) {
    if (s > 0) out += ',';
    out += std::to_string(history.observations[s]);
  }
  out += " u=" + format_message_history(history.messages);
  return out;
}

}  // namespace sigdet
