#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dyadic {

enum class ErrorCode {
  NonRefining,
  BadWeights,
  BadPartition,
  IndexOutOfGrid,
  OutOfRange,
  NotAdapted,
  NotIncreasing,
  NonzeroStart,
  LevelTooHigh,
  NotFiniteVariation,
  NotSubmartingale,
  NotMartingale,
  NotStoppingTime,
  NoAccumulationPoint,
  HypothesisViolated,
  ZeroInClosure,
  ZeroInF,
  NotClosed,
  NotPredictableInput,
  EmptyList,
  NotDecomposable,
  NotAnnounceable,
  SpaceMismatch,
  BadConfig,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonRefining: return "NonRefining";
    case ErrorCode::BadWeights: return "BadWeights";
    case ErrorCode::BadPartition: return "BadPartition";
    case ErrorCode::IndexOutOfGrid: return "IndexOutOfGrid";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NotAdapted: return "NotAdapted";
    case ErrorCode::NotIncreasing: return "NotIncreasing";
    case ErrorCode::NonzeroStart: return "NonzeroStart";
    case ErrorCode::LevelTooHigh: return "LevelTooHigh";
    case ErrorCode::NotFiniteVariation: return "NotFiniteVariation";
    case ErrorCode::NotSubmartingale: return "NotSubmartingale";
    case ErrorCode::NotMartingale: return "NotMartingale";
    case ErrorCode::NotStoppingTime: return "NotStoppingTime";
    case ErrorCode::NoAccumulationPoint: return "NoAccumulationPoint";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::ZeroInClosure: return "ZeroInClosure";
    case ErrorCode::ZeroInF: return "ZeroInF";
    case ErrorCode::NotClosed: return "NotClosed";
    case ErrorCode::NotPredictableInput: return "NotPredictableInput";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::NotDecomposable: return "NotDecomposable";
    case ErrorCode::NotAnnounceable: return "NotAnnounceable";
    case ErrorCode::SpaceMismatch: return "SpaceMismatch";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure in the library is reported through this one exception type;
/// `code()` identifies which contract was broken.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Comparison tolerance for probabilistic quantities.
inline constexpr double kTolerance = 1e-12;

}  // namespace dyadic
