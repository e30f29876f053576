#pragma once

#include <compare>
#include <string>
#include <vector>

namespace sigdet {

/// A sensor's output at one time step: either blank (keep observing) or a
/// stop carrying one of the message-alphabet symbols 0..M-1.
class Decision {
 public:
  constexpr Decision() = default;

  static constexpr Decision blank() { return Decision(); }
  static constexpr Decision stop(int symbol) {
    Decision d;
    d.value_ = symbol;
    return d;
  }
  /// Inverse of digit().
  static constexpr Decision from_digit(int digit) { return digit == 0 ? blank() : stop(digit - 1); }

  constexpr bool is_blank() const { return value_ < 0; }
  constexpr bool is_stop() const { return value_ >= 0; }
  /// Stop symbol, or -1 for blank.
  constexpr int value() const { return value_; }
  /// Blank maps to 0 and stop m to m + 1; used in mixed-radix history codes.
  constexpr int digit() const { return value_ + 1; }

  std::string to_string() const { return is_blank() ? "b" : std::to_string(value_); }

  friend constexpr auto operator<=>(Decision, Decision) = default;

 private:
  int value_ = -1;
};

/// Messages received at one time step, one entry per predecessor (ascending sensor id).
using MessageVector = std::vector<Decision>;
/// Index s-1 holds the messages emitted at time s.
using MessageHistory = std::vector<MessageVector>;

/// "b,1|0" style text: times separated by '|', predecessors by ','; "-" when empty.
inline std::string format_message_history(const MessageHistory& history) {
  if (history.empty()) return "-";
  std::string out;
  for (std::size_t s = 0; s < history.size(); ++s) {
    if (s > 0) out += '|';
    if (history[s].empty()) out += '.';
    for (std::size_t k = 0; k < history[s].size(); ++k) {
      if (k > 0) out += ',';
      out += history[s][k].to_string();
    }
  }
  return out;
}

/// Flat integer key of a message history (digits, time-major).
inline std::vector<int> message_history_key(const MessageHistory& history) {
  std::vector<int> key;
  for (const auto& step : history) {
    for (Decision d : step) key.push_back(d.digit());
  }
  return key;
}

}  // namespace sigdet
