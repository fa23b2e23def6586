#include "ipc/error.hpp"

namespace ipc {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::InvalidDomain: return "InvalidDomain";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteData: return "NonFiniteData";
    case ErrorCode::TimeInvariantRegressor: return "TimeInvariantRegressor";
    case ErrorCode::DmaxTooLarge: return "DmaxTooLarge";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::InvalidEigenvalues: return "InvalidEigenvalues";
    case ErrorCode::DegenerateThreshold: return "DegenerateThreshold";
    case ErrorCode::GroupBudgetExceeded: return "GroupBudgetExceeded";
    case ErrorCode::SingularLoadings: return "SingularLoadings";
    case ErrorCode::SingularZGram: return "SingularZGram";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::RankDeficientR: return "RankDeficientR";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::ZeroLoadings: return "ZeroLoadings";
    case ErrorCode::TooManyFailures: return "TooManyFailures";
    case ErrorCode::UnbalancedPanel: return "UnbalancedPanel";
    case ErrorCode::DuplicateCell: return "DuplicateCell";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

ErrorKind kind_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NonFiniteData:
    case ErrorCode::TimeInvariantRegressor:
    case ErrorCode::DmaxTooLarge:
    case ErrorCode::InvalidConfig:
    case ErrorCode::UnbalancedPanel:
    case ErrorCode::DuplicateCell:
    case ErrorCode::ParseError:
    case ErrorCode::MissingColumn:
    case ErrorCode::RankDeficientR:
      return ErrorKind::Data;
    case ErrorCode::IoError:
      return ErrorKind::Io;
    default:
      return ErrorKind::Numerical;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace ipc
