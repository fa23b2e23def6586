#pragma once

#include <stdexcept>
#include <string>

namespace ipc {

enum class ErrorCode {
  // numerics
  NonSymmetric,
  NonFinite,
  RankDeficient,
  InvalidDomain,
  // model / validation
  DimensionMismatch,
  NonFiniteData,
  TimeInvariantRegressor,
  DmaxTooLarge,
  InvalidConfig,
  // estimation
  SingularDesign,
  InvalidEigenvalues,
  DegenerateThreshold,
  GroupBudgetExceeded,
  SingularLoadings,
  SingularZGram,
  // inference
  SingularCovariance,
  RankDeficientR,
  EmptyGroup,
  ZeroLoadings,
  // simulation
  TooManyFailures,
  // io
  UnbalancedPanel,
  DuplicateCell,
  ParseError,
  MissingColumn,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

/// Coarse classification used to pick a CLI exit code.
enum class ErrorKind { Data, Numerical, Io };

ErrorKind kind_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ipc
