#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string>
#include <string_view>

#include "sigdet/error.hpp"

namespace sigdet {

/// Default cap on enumerated trajectories; `SIGDET_BUDGET` overrides it.
inline constexpr std::uint64_t kDefaultEnumerationBudget = 10'000'000;
/// Default cap on candidate rules examined by the brute-force oracle.
inline constexpr std::uint64_t kDefaultCandidateBudget = 1'000'000;
/// Beliefs closer than this are treated as the same information state.
inline constexpr double kBeliefTolerance = 1e-9;

inline std::uint64_t default_budget() {
  if (const char* env = std::getenv("SIGDET_BUDGET"); env != nullptr && *env != '\0') {
    std::uint64_t value = 0;
    std::string_view text(env);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec == std::errc() && ptr == text.data() + text.size() && value > 0) return value;
    throw Error(ErrorKind::kConfig, "SIGDET_BUDGET must be a positive integer, got '" +
                                        std::string(text) + "'");
  }
  return kDefaultEnumerationBudget;
}

/// Compensated (Kahan-Babuska) accumulator.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Welford running mean/variance.
class RunningStats {
 public:
  void add(double x) {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }
  std::uint64_t count() const { return count_; }
  double mean() const { return mean_; }
  double variance() const { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }
  double standard_error() const {
    return count_ > 0 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
  }

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// 17 significant digits: enough to round-trip any double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Parses "0.25", "1/4" or "-3" into a double.
inline double parse_probability_text(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  auto parse_number = [&](std::string_view s) {
    s = trim(s);
    std::string owned(s);
    char* end = nullptr;
    const double v = std::strtod(owned.c_str(), &end);
    if (owned.empty() || end != owned.c_str() + owned.size()) {
      throw Error(ErrorKind::kConfig, "cannot parse number '" + owned + "'");
    }
    return v;
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    const double num = parse_number(text.substr(0, slash));
    const double den = parse_number(text.substr(slash + 1));
    if (den == 0.0) throw Error(ErrorKind::kConfig, "zero denominator in '" + std::string(text) + "'");
    return num / den;
  }
  return parse_number(text);
}

}  // namespace sigdet
