#pragma once

// Block-level state machine for a single loanable-funds market.
//
// Accounting convention:
//   A   gross deposits, i.e. cash + outstanding loans. Accrued interest (both
//       the supplier and the reserve share) capitalizes into A, so accrual
//       never moves cash.
//   L   outstanding loans including accrued interest.
//   Pi  reserves, a protocol claim held inside A.
//   cash = A - L, never negative.
// Utilization is L / A under the Capped policy (reserves count as deposits,
// the ceiling is 100%) and L / (A - Pi) under the Uncapped policy, where the
// reserve claim is excluded from the lendable base. Under Uncapped, U > 1 is
// reachable once accrued reserves exceed cash on hand.
//
// Every state-changing call first accrues to its block using the rate fixed at
// the start of the interval.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "plflab/fixed_point.hpp"
#include "plflab/rate_models.hpp"

namespace plf {

using AccountId = std::string;

enum class CeilingPolicy { Capped, Uncapped };

std::string_view to_string(CeilingPolicy p);
CeilingPolicy parse_ceiling_policy(std::string_view text);

struct Position {
  FixedDec supplied_shares;
  FixedDec debt_principal;
  FixedDec debt_entry_index = FixedDec::one();
  FixedDec collateral_balance;

  friend bool operator==(const Position&, const Position&) = default;
};

struct LiquidationParams {
  FixedDec threshold = FixedDec::parse("1.5");  // minimum collateral value / debt
  FixedDec discount = FixedDec::parse("0.05");
  FixedDec penalty = FixedDec::parse("0.05");
  FixedDec close_factor = FixedDec::parse("0.5");  // max share of debt repaid per call

  void validate() const;
  friend bool operator==(const LiquidationParams&, const LiquidationParams&) = default;
};

struct LiquidationOutcome {
  FixedDec repaid;
  FixedDec seized_collateral;
  FixedDec penalty;
};

class MarketState {
 public:
  MarketState(RateModel model, FixedDec reserve_factor, CeilingPolicy policy,
              LiquidationParams liquidation = {}, std::int64_t start_block = 0);

  std::int64_t block_height() const { return block_height_; }
  FixedDec gross_deposits() const { return deposits_; }
  FixedDec total_loans() const { return loans_; }
  FixedDec reserves() const { return reserves_; }
  FixedDec index() const { return index_; }
  FixedDec derivative_supply() const { return derivative_supply_; }
  FixedDec reserve_factor() const { return reserve_factor_; }
  FixedDec collateral_price() const { return collateral_price_; }
  CeilingPolicy policy() const { return policy_; }
  const RateModel& model() const { return model_; }
  const LiquidationParams& liquidation_params() const { return liquidation_; }
  const std::map<AccountId, Position>& accounts() const { return accounts_; }

  FixedDec cash() const { return deposits_ - loans_; }
  FixedDec utilization() const;
  FixedDec borrow_rate() const;
  /// Model saving rate; for families without one, U * i_b * (1 - lambda).
  FixedDec supply_rate() const;
  /// (A - Pi) / derivative_supply; 1 for a fresh market.
  FixedDec exchange_rate() const;

  const Position* position(const AccountId& account) const;
  /// principal * I / I_entry
  FixedDec debt_of(const AccountId& account) const;
  FixedDec collateral_value_of(const AccountId& account) const;
  bool is_undercollateralized(const AccountId& account) const;

  void accrue(std::int64_t to_block);

  /// Returns the derivative tokens minted.
  FixedDec mint(std::int64_t block, const AccountId& account, FixedDec amount);
  /// Returns the underlying paid out.
  FixedDec redeem(std::int64_t block, const AccountId& account, FixedDec shares);
  void borrow(std::int64_t block, const AccountId& account, FixedDec amount);
  void repay(std::int64_t block, const AccountId& account, FixedDec amount);
  LiquidationOutcome liquidate(std::int64_t block, const AccountId& liquidator, const AccountId& borrower,
                               FixedDec repay_amount);
  void post_collateral(std::int64_t block, const AccountId& account, FixedDec amount);
  void set_model(std::int64_t block, RateModel model);
  void set_price(std::int64_t block, FixedDec price);

  /// Throws std::logic_error naming the first violated invariant.
  void check_invariants() const;

  friend bool operator==(const MarketState&, const MarketState&) = default;

 private:
  Position& account_ref(const AccountId& account);
  void set_debt(Position& pos, FixedDec debt);

  RateModel model_;
  FixedDec reserve_factor_;
  CeilingPolicy policy_;
  LiquidationParams liquidation_;
  std::int64_t block_height_ = 0;
  FixedDec deposits_;
  FixedDec loans_;
  FixedDec reserves_;
  FixedDec index_ = FixedDec::one();
  FixedDec derivative_supply_;
  FixedDec collateral_price_ = FixedDec::one();
  std::map<AccountId, Position> accounts_;
};

// ---------------------------------------------------------------------------
// Event log

enum class Action { Mint, Redeem, Borrow, Repay, Liquidate, SetModel, SetPrice, PostCollateral };

std::string_view to_string(Action a);
Action parse_action(std::string_view text);

/// One row of the event log. For `liquidate` the account is the borrower and
/// the repayer is the built-in liquidator; for `set_model` the account holds a
/// label resolved against a model table.
struct Event {
  std::int64_t block = 0;
  Action action = Action::Mint;
  AccountId account;
  FixedDec amount;

  friend bool operator==(const Event&, const Event&) = default;
};

inline constexpr std::string_view kLiquidatorAccount = "liquidator";

/// Applies one event. `models` resolves set_model labels.
void apply_event(MarketState& state, const Event& event, const std::map<std::string, RateModel>& models = {});

}  // namespace plf
