#include "plflab/market_engine.hpp"

#include <stdexcept>

namespace plf {

std::string_view to_string(CeilingPolicy p) { return p == CeilingPolicy::Capped ? "capped" : "uncapped"; }

CeilingPolicy parse_ceiling_policy(std::string_view text) {
  if (text == "capped") return CeilingPolicy::Capped;
  if (text == "uncapped") return CeilingPolicy::Uncapped;
  throw Error(ErrorCode::InvalidParameter, "unknown ceiling policy '" + std::string(text) + "'");
}

void LiquidationParams::validate() const {
  if (threshold <= FixedDec::one()) throw Error(ErrorCode::InvalidParameter, "liquidation threshold must be > 1");
  auto in_unit = [](FixedDec v) { return !v.is_negative() && v < FixedDec::one(); };
  if (!in_unit(discount)) throw Error(ErrorCode::InvalidParameter, "discount must lie in [0, 1)");
  if (!in_unit(penalty)) throw Error(ErrorCode::InvalidParameter, "penalty must lie in [0, 1)");
  if (close_factor <= FixedDec::zero() || close_factor > FixedDec::one()) {
    throw Error(ErrorCode::InvalidParameter, "close factor must lie in (0, 1]");
  }
}

MarketState::MarketState(RateModel model, FixedDec reserve_factor, CeilingPolicy policy,
                         LiquidationParams liquidation, std::int64_t start_block)
    : model_(std::move(model)),
      reserve_factor_(reserve_factor),
      policy_(policy),
      liquidation_(liquidation),
      block_height_(start_block) {
  validate(model_);
  liquidation_.validate();
  if (auto lambda = model_reserve_factor(model_)) reserve_factor_ = *lambda;
  if (reserve_factor_.is_negative() || reserve_factor_ > FixedDec::one()) {
    throw Error(ErrorCode::InvalidParameter, "reserve factor must lie in [0, 1]");
  }
}

FixedDec MarketState::utilization() const {
  const FixedDec base = policy_ == CeilingPolicy::Capped ? deposits_ : deposits_ - reserves_;
  if (base <= FixedDec::zero()) {
    if (loans_.is_zero()) return FixedDec::zero();
    throw Error(ErrorCode::IllFormedMarket, "loans outstanding against an empty deposit base");
  }
  return plf::utilization(loans_, base);
}

FixedDec MarketState::borrow_rate() const { return plf::borrow_rate(model_, utilization()); }

FixedDec MarketState::supply_rate() const {
  const FixedDec u = utilization();
  if (std::holds_alternative<AaveVariableModel>(model_)) {
    return mul(u, mul(plf::borrow_rate(model_, u), FixedDec::one() - reserve_factor_));
  }
  return saving_rate(model_, u);
}

FixedDec MarketState::exchange_rate() const {
  if (derivative_supply_.is_zero()) return FixedDec::one();
  return div(deposits_ - reserves_, derivative_supply_);
}

const Position* MarketState::position(const AccountId& account) const {
  auto it = accounts_.find(account);
  return it == accounts_.end() ? nullptr : &it->second;
}

FixedDec MarketState::debt_of(const AccountId& account) const {
  const Position* pos = position(account);
  if (pos == nullptr || pos->debt_principal.is_zero()) return FixedDec::zero();
  return mul_div(pos->debt_principal, index_, pos->debt_entry_index);
}

FixedDec MarketState::collateral_value_of(const AccountId& account) const {
  const Position* pos = position(account);
  if (pos == nullptr) return FixedDec::zero();
  return mul(pos->collateral_balance, collateral_price_);
}

bool MarketState::is_undercollateralized(const AccountId& account) const {
  const FixedDec debt = debt_of(account);
  if (debt.is_zero()) return false;
  return collateral_value_of(account) < mul(liquidation_.threshold, debt);
}

void MarketState::accrue(std::int64_t to_block) {
  if (to_block < block_height_) {
    throw Error(ErrorCode::InvalidBlock, "cannot accrue backwards to block " + std::to_string(to_block));
  }
  const std::int64_t elapsed = to_block - block_height_;
  if (elapsed == 0) return;
  const FixedDec rt = mul_int(borrow_rate(), elapsed);
  block_height_ = to_block;
  if (rt.is_zero()) return;

  const FixedDec interest = mul(loans_, rt);
  index_ += mul(index_, rt);
  loans_ += interest;
  reserves_ += mul(interest, reserve_factor_);
  deposits_ += interest;
}

Position& MarketState::account_ref(const AccountId& account) { return accounts_[account]; }

void MarketState::set_debt(Position& pos, FixedDec debt) {
  pos.debt_principal = debt;
  pos.debt_entry_index = index_;
}

FixedDec MarketState::mint(std::int64_t block, const AccountId& account, FixedDec amount) {
  if (amount <= FixedDec::zero()) throw Error(ErrorCode::InvalidParameter, "mint amount must be > 0");
  accrue(block);
  FixedDec shares = amount;
  if (!derivative_supply_.is_zero()) {
    const FixedDec backing = deposits_ - reserves_;
    if (backing <= FixedDec::zero()) throw Error(ErrorCode::IllFormedMarket, "outstanding shares with no backing");
    shares = mul_div(amount, derivative_supply_, backing);
  }
  deposits_ += amount;
  derivative_supply_ += shares;
  account_ref(account).supplied_shares += shares;
  return shares;
}

FixedDec MarketState::redeem(std::int64_t block, const AccountId& account, FixedDec shares) {
  if (shares <= FixedDec::zero()) throw Error(ErrorCode::InvalidParameter, "redeem amount must be > 0");
  accrue(block);
  auto it = accounts_.find(account);
  if (it == accounts_.end() || it->second.supplied_shares < shares) {
    throw Error(ErrorCode::InsufficientShares, "account '" + account + "' holds too few shares");
  }
  const FixedDec payout = mul_div(shares, deposits_ - reserves_, derivative_supply_);
  if (payout > cash()) {
    throw Error(ErrorCode::InsufficientLiquidity,
                "payout " + payout.to_string() + " exceeds cash " + cash().to_string());
  }
  deposits_ -= payout;
  derivative_supply_ -= shares;
  it->second.supplied_shares -= shares;
  return payout;
}

void MarketState::borrow(std::int64_t block, const AccountId& account, FixedDec amount) {
  if (amount.is_negative()) throw Error(ErrorCode::InvalidParameter, "borrow amount must be >= 0");
  accrue(block);
  if (amount.is_zero()) return;
  if (amount > cash()) {
    throw Error(ErrorCode::InsufficientCash, "borrow " + amount.to_string() + " exceeds cash " + cash().to_string());
  }
  const FixedDec new_debt = debt_of(account) + amount;
  if (collateral_value_of(account) < mul(liquidation_.threshold, new_debt)) {
    throw Error(ErrorCode::InsufficientCollateral, "account '" + account + "' lacks collateral");
  }
  set_debt(account_ref(account), new_debt);
  loans_ += amount;
}

void MarketState::repay(std::int64_t block, const AccountId& account, FixedDec amount) {
  if (amount.is_negative()) throw Error(ErrorCode::InvalidParameter, "repay amount must be >= 0");
  accrue(block);
  if (amount.is_zero()) return;
  const FixedDec debt = debt_of(account);
  if (amount > debt) throw Error(ErrorCode::ExceedsDebt, "repay exceeds debt of '" + account + "'");
  set_debt(account_ref(account), debt - amount);
  // Per-account debts are floored individually, so the aggregate can trail
  // their sum by rounding dust.
  loans_ = amount > loans_ ? FixedDec::zero() : loans_ - amount;
}

LiquidationOutcome MarketState::liquidate(std::int64_t block, const AccountId& liquidator,
                                          const AccountId& borrower, FixedDec repay_amount) {
  if (repay_amount <= FixedDec::zero()) throw Error(ErrorCode::InvalidParameter, "repay amount must be > 0");
  accrue(block);
  if (!is_undercollateralized(borrower)) {
    throw Error(ErrorCode::NotUndercollateralized, "account '" + borrower + "' is healthy");
  }
  const FixedDec debt = debt_of(borrower);
  if (repay_amount > mul(liquidation_.close_factor, debt)) {
    throw Error(ErrorCode::RepayTooLarge, "repay exceeds close factor of debt");
  }
  if (collateral_price_.is_zero()) throw Error(ErrorCode::IllFormedMarket, "collateral price is zero");

  Position& pos = account_ref(borrower);
  const FixedDec seize_value = div(repay_amount, FixedDec::one() - liquidation_.discount);
  const FixedDec seized = min(div(seize_value, collateral_price_), pos.collateral_balance);
  const FixedDec penalty = mul(liquidation_.penalty, repay_amount);

  // The penalty is charged to the borrower's debt and booked to reserves.
  set_debt(pos, debt - repay_amount + penalty);
  pos.collateral_balance -= seized;
  loans_ = (repay_amount > loans_ ? FixedDec::zero() : loans_ - repay_amount) + penalty;
  deposits_ += penalty;
  reserves_ += penalty;
  account_ref(liquidator).collateral_balance += seized;
  return {repay_amount, seized, penalty};
}

void MarketState::post_collateral(std::int64_t block, const AccountId& account, FixedDec amount) {
  if (amount <= FixedDec::zero()) throw Error(ErrorCode::InvalidParameter, "collateral amount must be > 0");
  accrue(block);
  account_ref(account).collateral_balance += amount;
}

void MarketState::set_model(std::int64_t block, RateModel model) {
  validate(model);
  accrue(block);
  if (auto lambda = model_reserve_factor(model)) reserve_factor_ = *lambda;
  model_ = std::move(model);
}

void MarketState::set_price(std::int64_t block, FixedDec price) {
  if (price.is_negative()) throw Error(ErrorCode::InvalidParameter, "price must be >= 0");
  accrue(block);
  collateral_price_ = price;
}

void MarketState::check_invariants() const {
  auto fail = [](const std::string& what) { throw std::logic_error("market invariant violated: " + what); };
  if (deposits_.is_negative()) fail("A < 0");
  if (loans_.is_negative()) fail("L < 0");
  if (reserves_.is_negative()) fail("reserves < 0");
  if (derivative_supply_.is_negative()) fail("derivative supply < 0");
  if (index_ < FixedDec::one()) fail("index < 1");
  if (cash().is_negative()) fail("cash = A - L < 0");
  if (policy_ == CeilingPolicy::Capped && loans_ > deposits_) fail("L > A under capped policy");

  FixedDec shares;
  FixedDec debts;
  for (const auto& [id, pos] : accounts_) {
    if (pos.supplied_shares.is_negative() || pos.debt_principal.is_negative() ||
        pos.collateral_balance.is_negative()) {
      fail("negative position for '" + id + "'");
    }
    shares += pos.supplied_shares;
    debts += debt_of(id);
  }
  if (shares != derivative_supply_) fail("sum of shares != derivative supply");
  // Aggregate and per-account debt take different rounding paths.
  const FixedDec gap = debts > loans_ ? debts - loans_ : loans_ - debts;
  const FixedDec tolerance = max(FixedDec::from_mantissa(1'000'000), mul(loans_, FixedDec::from_mantissa(1'000'000)));
  if (gap > tolerance) fail("sum of account debts differs from L by " + gap.to_string());
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Mint: return "mint";
    case Action::Redeem: return "redeem";
    case Action::Borrow: return "borrow";
    case Action::Repay: return "repay";
    case Action::Liquidate: return "liquidate";
    case Action::SetModel: return "set_model";
    case Action::SetPrice: return "set_price";
    case Action::PostCollateral: return "post_collateral";
  }
  return "unknown";
}

Action parse_action(std::string_view text) {
  for (Action a : {Action::Mint, Action::Redeem, Action::Borrow, Action::Repay, Action::Liquidate, Action::SetModel,
                   Action::SetPrice, Action::PostCollateral}) {
    if (to_string(a) == text) return a;
  }
  throw Error(ErrorCode::ParseError, "unknown action '" + std::string(text) + "'");
}

void apply_event(MarketState& state, const Event& event, const std::map<std::string, RateModel>& models) {
  switch (event.action) {
    case Action::Mint: state.mint(event.block, event.account, event.amount); break;
    case Action::Redeem: state.redeem(event.block, event.account, event.amount); break;
    case Action::Borrow: state.borrow(event.block, event.account, event.amount); break;
    case Action::Repay: state.repay(event.block, event.account, event.amount); break;
    case Action::Liquidate:
      state.liquidate(event.block, std::string(kLiquidatorAccount), event.account, event.amount);
      break;
    case Action::SetModel: {
      auto it = models.find(event.account);
      if (it == models.end()) throw Error(ErrorCode::InvalidParameter, "unknown model label '" + event.account + "'");
      state.set_model(event.block, it->second);
      break;
    }
    case Action::SetPrice: state.set_price(event.block, event.amount); break;
    case Action::PostCollateral: state.post_collateral(event.block, event.account, event.amount); break;
  }
}

}  // namespace plf
