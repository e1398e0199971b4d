#include <array>

#include "doctest.h"
#include "plflab/rate_models.hpp"

using namespace plf;

namespace {

FixedDec m(long long v) { return FixedDec::from_mantissa(v); }
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

KinkedModel apr6() { return {FixedDec::zero(), m(2900146648), m(570776255707), d("0.9"), d("0.1")}; }

}  // namespace

TEST_SUITE("rate_models") {
  TEST_CASE("utilization") {
    CHECK(utilization(d("50"), d("100")) == d("0.5"));
    CHECK(utilization(d("0"), d("7")) == FixedDec::zero());
    CHECK(utilization(d("105"), d("100")) == d("1.05"));
    CHECK(utilization(d("0"), d("0")) == FixedDec::zero());
    CHECK(code_of([] { utilization(d("1"), d("0")); }) == ErrorCode::IllFormedMarket);
  }

  TEST_CASE("borrow rate") {
    CHECK(borrow_rate(apr6(), FixedDec::zero()) == FixedDec::zero());
    CHECK(borrow_rate(apr6(), d("0.9")) == m(2610131983));
    CHECK(borrow_rate(LinearModel{d("0.01"), d("0.2")}, d("0.5")) == d("0.11"));
    const NonLinearModel nl{m(11), m(22), m(33), d("0.1")};
    CHECK(borrow_rate(nl, FixedDec::one()) == m(66));
    CHECK(code_of([] { borrow_rate(apr6(), d("-0.1")); }) == ErrorCode::InvalidParameter);
  }

  TEST_CASE("kinked continuity and extrapolation") {
    const KinkedModel k{m(19637062989), m(264248265), m(570776255707), d("0.9"), d("0.1")};
    const FixedDec at = borrow_rate(k, d("0.9"));
    CHECK(at == k.alpha + mul(k.beta, k.u_star));
    CHECK(borrow_rate(k, d("1.1")) > borrow_rate(k, d("1.0")));
  }

  TEST_CASE("saving rate") {
    const NonLinearModel nl{d("0.1"), d("0.3"), d("0.1"), d("0.1")};
    CHECK(saving_rate(nl, FixedDec::one()) == d("0.45"));
    for (const char* u : {"0", "0.3", "0.95", "1"}) {
      CHECK(saving_rate(apr6(), d(u)) <= borrow_rate(apr6(), d(u)));
    }
    KinkedModel full = apr6();
    full.lambda = FixedDec::one();
    CHECK(saving_rate(full, d("0.7")) == FixedDec::zero());
    CHECK(saving_rate(LinearModel{d("0.01"), d("0.2")}, FixedDec::zero()) == FixedDec::zero());
    const AaveVariableModel aave{d("0"), d("0.8"), d("0.04"), d("0.75")};
    CHECK(code_of([&] { saving_rate(aave, d("0.5")); }) == ErrorCode::NotDefinedForModel);
  }

  TEST_CASE("aave two slope") {
    const AaveVariableModel a{d("0.01"), d("0.8"), d("0.04"), d("0.75")};
    CHECK(borrow_rate(a, FixedDec::zero()) == d("0.01"));
    CHECK(borrow_rate(a, d("0.8")) == d("0.05"));
    CHECK(borrow_rate(a, d("0.4")) == d("0.03"));
    const AaveVariableModel pinned{d("0.01"), d("1"), d("0.04"), d("0.75")};
    CHECK(borrow_rate(pinned, d("1")) == d("0.05"));
    CHECK(borrow_rate(pinned, d("1.2")) == d("0.05"));
  }

  TEST_CASE("validation") {
    CHECK(code_of([] { validate(LinearModel{d("-0.01"), d("0.2")}); }) == ErrorCode::InvalidParameter);
    KinkedModel k = apr6();
    k.u_star = d("1.1");
    CHECK(code_of([&] { validate(k); }) == ErrorCode::InvalidParameter);
    k = apr6();
    k.lambda = d("1.5");
    CHECK(code_of([&] { validate(k); }) == ErrorCode::InvalidParameter);
    CHECK_NOTHROW(validate(apr6()));
  }

  TEST_CASE("annualize and default nonlinear") {
    CHECK(annualize(m(10), 100) == m(1000));
    CHECK(per_block(d("1"), 4) == d("0.25"));
    const NonLinearModel nl = default_nonlinear();
    const FixedDec top = borrow_rate(nl, FixedDec::one());
    CHECK(top == nl.alpha + nl.beta + nl.gamma);
    CHECK(std::abs(annualize(top).to_double() - 0.5) <= 1e-12);
  }

  TEST_CASE("market and stable rate") {
    const std::array<PlatformBorrowState, 2> even{{{d("0.02"), d("5")}, {d("0.04"), d("5")}}};
    CHECK(market_rate(even) == d("0.03"));
    const std::array<PlatformBorrowState, 1> one{{{d("0.07"), d("3")}}};
    CHECK(market_rate(one) == d("0.07"));
    const std::array<PlatformBorrowState, 2> skew{{{d("0.10"), d("1")}, {d("0.02"), d("9")}}};
    CHECK(market_rate(skew) == d("0.028"));
    const std::array<PlatformBorrowState, 1> none{{{d("0.07"), d("0")}}};
    CHECK(code_of([&] { market_rate(none); }) == ErrorCode::EmptyMarket);

    const AaveVariableModel slopes{d("0"), d("0.9"), d("0.02"), d("0.5")};
    CHECK(stable_rate(d("0.03"), slopes, d("0.9")) == d("0.05"));
    CHECK(stable_rate(d("0.03"), slopes, d("0")) == d("0.03"));
    CHECK(stable_rate(d("0.03"), slopes, d("0.95")) == d("0.3"));
  }

  TEST_CASE("rebalance") {
    const BorrowBook book{d("100"), d("0.06"), d("100"), d("0.06")};
    CHECK(rebalance_check({d("0.05"), 1, d("0.1")}, book, d("0.05")) == RebalanceDecision::Up);
    const BorrowBook flat{d("100"), d("0.1"), d("100"), d("0.1")};
    CHECK(rebalance_check({d("0.1"), 1, d("0.1")}, flat, d("0.1")) == RebalanceDecision::None);
    const BorrowBook high{d("100"), d("0.12"), d("100"), d("0.12")};
    CHECK(rebalance_check({d("0.12"), 1, d("0.1")}, high, d("0.10")) == RebalanceDecision::Down);
    CHECK(to_string(RebalanceDecision::Down) == "down");
  }
}
