#include "plflab/error.hpp"

namespace plf {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IllFormedMarket: return "IllFormedMarket";
    case ErrorCode::NotDefinedForModel: return "NotDefinedForModel";
    case ErrorCode::EmptyMarket: return "EmptyMarket";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InsufficientLiquidity: return "InsufficientLiquidity";
    case ErrorCode::InsufficientShares: return "InsufficientShares";
    case ErrorCode::InsufficientCollateral: return "InsufficientCollateral";
    case ErrorCode::InsufficientCash: return "InsufficientCash";
    case ErrorCode::ExceedsDebt: return "ExceedsDebt";
    case ErrorCode::NotUndercollateralized: return "NotUndercollateralized";
    case ErrorCode::RepayTooLarge: return "RepayTooLarge";
    case ErrorCode::UnknownAccount: return "UnknownAccount";
    case ErrorCode::InvalidBlock: return "InvalidBlock";
    case ErrorCode::ScheduleConflict: return "ScheduleConflict";
    case ErrorCode::BlockOutOfRange: return "BlockOutOfRange";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::InsufficientObservations: return "InsufficientObservations";
    case ErrorCode::DegenerateRegressor: return "DegenerateRegressor";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::RankOutOfRange: return "RankOutOfRange";
    case ErrorCode::NonPsdCovariance: return "NonPsdCovariance";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SchemaError: return "SchemaError";
  }
  return "Unknown";
}

}  // namespace plf
