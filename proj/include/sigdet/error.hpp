#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sigdet {

enum class ErrorKind {
  kInvalidPrior,
  kPmfNotNormalized,
  kGraphInconsistent,
  kCostTableIncomplete,
  kParameterOutOfRange,
  kZeroProbabilityHistory,
  kZeroLikelihood,
  kNoCompatibleHistory,
  kBlankAtHorizon,
  kWrongScenario,
  kBudgetExceeded,
  kConfig,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidPrior: return "InvalidPrior";
    case ErrorKind::kPmfNotNormalized: return "PmfNotNormalized";
    case ErrorKind::kGraphInconsistent: return "GraphInconsistent";
    case ErrorKind::kCostTableIncomplete: return "CostTableIncomplete";
    case ErrorKind::kParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorKind::kZeroProbabilityHistory: return "ZeroProbabilityHistory";
    case ErrorKind::kZeroLikelihood: return "ZeroLikelihood";
    case ErrorKind::kNoCompatibleHistory: return "NoCompatibleHistory";
    case ErrorKind::kBlankAtHorizon: return "BlankAtHorizon";
    case ErrorKind::kWrongScenario: return "WrongScenario";
    case ErrorKind::kBudgetExceeded: return "BudgetExceeded";
    case ErrorKind::kConfig: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (notably the CLI) can map it to a stable exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace sigdet
