#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace plf {

enum class ErrorCode {
  // fixed point
  Overflow,
  DivisionByZero,
  ParseError,
  // rate models
  IllFormedMarket,
  NotDefinedForModel,
  EmptyMarket,
  InvalidParameter,
  // market engine
  InsufficientLiquidity,
  InsufficientShares,
  InsufficientCollateral,
  InsufficientCash,
  ExceedsDebt,
  NotUndercollateralized,
  RepayTooLarge,
  UnknownAccount,
  InvalidBlock,
  // simulator
  ScheduleConflict,
  BlockOutOfRange,
  InvalidScenario,
  // econometrics
  InsufficientObservations,
  DegenerateRegressor,
  SingularDesign,
  NumericalFailure,
  RankOutOfRange,
  NonPsdCovariance,
  EmptyInput,
  // analytics
  AllZero,
  // input/output
  IoError,
  SchemaError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable error code. Every module in the
/// library reports failures through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace plf
