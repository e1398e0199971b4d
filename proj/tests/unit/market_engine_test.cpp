#include "doctest.h"
#include "plflab/market_engine.hpp"

using namespace plf;

namespace {

FixedDec d(const char* s) { return FixedDec::parse(s); }

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected plf::Error");
  return ErrorCode::Overflow;
}

MarketState linear_market(const char* alpha, const char* lambda = "0",
                          CeilingPolicy policy = CeilingPolicy::Capped, LiquidationParams liq = {}) {
  return MarketState(LinearModel{d(alpha), FixedDec::zero()}, d(lambda), policy, liq);
}

// A = 1250, L = 750, S = 1000: exchange rate 1.25.
MarketState market_at_125() {
  MarketState s = linear_market("0.0005");
  s.mint(0, "s", d("1000"));
  s.post_collateral(0, "b", d("10000"));
  s.borrow(0, "b", d("500"));
  s.accrue(1000);
  return s;
}

}  // namespace

TEST_SUITE("market_engine") {
  TEST_CASE("accrue") {
    MarketState zero = linear_market("0");
    zero.mint(0, "s", d("100"));
    MarketState before = zero;
    zero.accrue(50);
    CHECK(zero.block_height() == 50);
    CHECK(zero.gross_deposits() == before.gross_deposits());
    CHECK(zero.index() == FixedDec::one());

    MarketState same = linear_market("0.000000001");
    MarketState copy = same;
    same.accrue(0);
    CHECK(same == copy);

    MarketState idx = linear_market("0.000000001");
    idx.accrue(10);
    CHECK(idx.index().mantissa() == 1'000'000'010'000'000'000LL);

    MarketState s = linear_market("0.000000001", "0.1");
    s.mint(0, "s", d("2000"));
    s.post_collateral(0, "b", d("5000"));
    s.borrow(0, "b", d("1000"));
    s.accrue(1'000'000);
    CHECK(s.reserves() == d("0.1"));
    CHECK(s.gross_deposits() == d("2001"));
    CHECK(s.total_loans() == d("1001"));
    CHECK(s.cash() == d("1000"));
    CHECK(code_of([&] { s.accrue(5); }) == ErrorCode::InvalidBlock);
  }

  TEST_CASE("mint and redeem") {
    MarketState s = linear_market("0");
    CHECK(s.exchange_rate() == FixedDec::one());
    CHECK(s.mint(0, "a", d("100")) == d("100"));
    CHECK(s.mint(3, "b", d("50")) == d("50"));
    CHECK(s.redeem(4, "a", d("100")) == d("100"));
    CHECK(code_of([&] { s.redeem(4, "a", d("1")); }) == ErrorCode::InsufficientShares);
    CHECK(code_of([&] { s.mint(4, "a", d("0")); }) == ErrorCode::InvalidParameter);

    MarketState r = market_at_125();
    CHECK(r.exchange_rate() == d("1.25"));
    CHECK(r.mint(1000, "t", d("100")) == d("80"));
    CHECK(r.redeem(1000, "t", d("80")) == d("100"));
  }

  TEST_CASE("illiquid redeem") {
    MarketState s = linear_market("0");
    s.mint(0, "s", d("100"));
    s.post_collateral(0, "b", d("1000"));
    s.borrow(0, "b", d("90"));
    CHECK(code_of([&] { s.redeem(0, "s", d("50")); }) == ErrorCode::InsufficientLiquidity);
    CHECK(s.redeem(0, "s", d("10")) == d("10"));
  }

  TEST_CASE("borrow and repay") {
    MarketState s = linear_market("0");
    s.mint(0, "s", d("100"));
    s.post_collateral(0, "b", d("1000"));
    const MarketState before = s;
    s.borrow(0, "b", d("0"));
    CHECK(s == before);
    s.borrow(0, "b", d("50"));
    CHECK(s.utilization() == d("0.5"));
    s.borrow(0, "b", d("30"));
    CHECK(s.utilization() == d("0.8"));
    s.repay(0, "b", d("80"));
    CHECK(s.total_loans() == FixedDec::zero());
    CHECK(code_of([&] { s.repay(0, "b", d("1")); }) == ErrorCode::ExceedsDebt);
    CHECK(code_of([&] { s.borrow(0, "b", d("101")); }) == ErrorCode::InsufficientCash);
    CHECK(code_of([&] { s.borrow(0, "poor", d("1")); }) == ErrorCode::InsufficientCollateral);
  }

  TEST_CASE("liquidation") {
    LiquidationParams liq;
    liq.discount = d("0.1");
    liq.penalty = FixedDec::zero();
    liq.close_factor = FixedDec::one();
    MarketState s = linear_market("0", "0", CeilingPolicy::Capped, liq);
    s.mint(0, "s", d("1000"));
    s.post_collateral(0, "b", d("200"));
    s.borrow(0, "b", d("100"));
    CHECK(code_of([&] { s.liquidate(0, "liq", "b", d("10")); }) == ErrorCode::NotUndercollateralized);
    s.set_price(1, d("0.7"));
    CHECK(s.is_undercollateralized("b"));
    CHECK(code_of([&] { s.liquidate(1, "liq", "b", d("101")); }) == ErrorCode::RepayTooLarge);
    const LiquidationOutcome out = s.liquidate(2, "liq", "b", d("50"));
    CHECK(out.repaid == d("50"));
    CHECK(div(d("50"), d("0.9")).mantissa_string() == "55555555555555555555");
    CHECK(out.seized_collateral == div(div(d("50"), d("0.9")), d("0.7")));
    CHECK(s.debt_of("b") == d("50"));
  }

  TEST_CASE("liquidation at par") {
    LiquidationParams liq;
    liq.discount = FixedDec::zero();
    liq.penalty = FixedDec::zero();
    MarketState s = linear_market("0", "0", CeilingPolicy::Capped, liq);
    s.mint(0, "s", d("1000"));
    s.post_collateral(0, "b", d("160"));
    s.borrow(0, "b", d("100"));
    s.set_price(0, d("0.5"));
    const LiquidationOutcome out = s.liquidate(0, "liq", "b", d("40"));
    CHECK(out.seized_collateral == d("80"));
    CHECK(s.position("liq")->collateral_balance == d("80"));
  }

  TEST_CASE("exchange rate") {
    MarketState s = linear_market("0.00002", "0.1");
    s.mint(0, "s", d("1000"));
    s.post_collateral(0, "b", d("5000"));
    s.borrow(0, "b", d("500"));
    s.accrue(1000);
    CHECK(s.gross_deposits() == d("1010"));
    CHECK(s.reserves() == d("1"));
    CHECK(s.exchange_rate() == d("1.009"));
    CHECK_NOTHROW(s.check_invariants());
  }

  TEST_CASE("uncapped utilization excludes reserves") {
    MarketState s = linear_market("0.00002", "0.1", CeilingPolicy::Uncapped);
    s.mint(0, "s", d("1000"));
    s.post_collateral(0, "b", d("5000"));
    s.borrow(0, "b", d("500"));
    s.accrue(1000);
    CHECK(s.utilization() == div(d("510"), d("1009")));
  }

  TEST_CASE("events") {
    CHECK(parse_action("post_collateral") == Action::PostCollateral);
    CHECK(to_string(Action::SetModel) == "set_model");
    CHECK(code_of([] { parse_action("steal"); }) == ErrorCode::ParseError);
    MarketState s = linear_market("0");
    std::map<std::string, RateModel> models{{"hi", LinearModel{d("0.001"), d("0")}}};
    apply_event(s, {0, Action::Mint, "s", d("10")}, models);
    apply_event(s, {1, Action::SetModel, "hi", {}}, models);
    CHECK(s.borrow_rate() == d("0.001"));
    CHECK(code_of([&] { apply_event(s, {2, Action::SetModel, "nope", {}}, models); }) == ErrorCode::InvalidParameter);
  }
}
