#pragma once

// Interest-rate models for loanable-funds markets.
//
// All rates are per-block FixedDec values; `annualize` converts for reporting.
// Utilization above 1 is accepted everywhere and extrapolates the last segment
// of each curve.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>

#include "plflab/fixed_point.hpp"

namespace plf {

/// i_b = alpha + beta * U
struct LinearModel {
  FixedDec alpha;
  FixedDec beta;
  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

/// i_b = alpha * U + beta * U^32 + gamma * U^64 (dYdX-style)
struct NonLinearModel {
  FixedDec alpha;
  FixedDec beta;
  FixedDec gamma;
  FixedDec lambda;  // reserve factor
  friend bool operator==(const NonLinearModel&, const NonLinearModel&) = default;
};

/// Linear below the kink u_star, slope gamma above it (Compound-style).
struct KinkedModel {
  FixedDec alpha;  // base rate
  FixedDec beta;   // multiplier
  FixedDec gamma;  // jump multiplier
  FixedDec u_star;
  FixedDec lambda;  // reserve factor
  friend bool operator==(const KinkedModel&, const KinkedModel&) = default;
};

/// Two-slope variable rate (Aave-style).
struct AaveVariableModel {
  FixedDec base;
  FixedDec u_optimal;
  FixedDec r_slope1;
  FixedDec r_slope2;
  friend bool operator==(const AaveVariableModel&, const AaveVariableModel&) = default;
};

using RateModel = std::variant<LinearModel, NonLinearModel, KinkedModel, AaveVariableModel>;

std::string_view model_name(const RateModel& model);

/// Throws InvalidParameter when a parameter is negative or a threshold is
/// outside (0, 1] / a reserve factor outside [0, 1].
void validate(const RateModel& model);

/// Reserve factor carried by the model, if its family defines one.
std::optional<FixedDec> model_reserve_factor(const RateModel& model);

inline constexpr std::int64_t kDefaultBlocksPerYear = 2'102'400;  // 15-second blocks

/// U = L / A. Returns 0 for an empty market; throws IllFormedMarket when
/// A = 0 and L > 0.
FixedDec utilization(FixedDec total_loans, FixedDec gross_deposits);

FixedDec borrow_rate(const RateModel& model, FixedDec u);

/// Throws NotDefinedForModel for AaveVariable.
FixedDec saving_rate(const RateModel& model, FixedDec u);

FixedDec annualize(FixedDec per_block_rate, std::int64_t blocks_per_year = kDefaultBlocksPerYear);
/// floor(annual / blocks_per_year)
FixedDec per_block(FixedDec annual_rate, std::int64_t blocks_per_year = kDefaultBlocksPerYear);

/// Stand-in dYdX parameters: alpha = 0.1, beta = 0.3, gamma = 0.1 annualized,
/// rounded per block so that i_b(1) annualizes to 0.5 as closely as the
/// 18-digit grid allows. Not the production coefficients.
NonLinearModel default_nonlinear(std::int64_t blocks_per_year = kDefaultBlocksPerYear);

// ---------------------------------------------------------------------------
// Stable-rate machinery

/// Borrow totals of one platform in a given market.
struct PlatformBorrowState {
  FixedDec borrow_rate;
  FixedDec borrowed;
};

/// Variable and stable books of a single market.
struct BorrowBook {
  FixedDec variable_borrowed;
  FixedDec variable_rate;
  FixedDec stable_borrowed;
  FixedDec stable_rate;
};

struct StablePosition {
  FixedDec user_rate;
  std::int64_t window_blocks = 1;
  FixedDec delta;  // change in the stable rate over the window
};

enum class RebalanceDecision { None, Up, Down };

std::string_view to_string(RebalanceDecision d);

/// Borrow-weighted mean rate across platforms. Throws EmptyMarket when
/// nothing is borrowed.
FixedDec market_rate(std::span<const PlatformBorrowState> platforms);

/// Two-slope curve of `slopes` with the base replaced by the market rate.
FixedDec stable_rate(FixedDec market_rate, const AaveVariableModel& slopes, FixedDec u);

/// Up when the user's stable rate is below the book's borrow-weighted mean
/// (checked first); Down when it exceeds latest_stable * (1 + delta).
RebalanceDecision rebalance_check(const StablePosition& pos, const BorrowBook& book, FixedDec latest_stable);

}  // namespace plf
