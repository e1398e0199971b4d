#include "plflab/rate_models.hpp"

#include <array>
#include <string>
#include <vector>

namespace plf {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void require_non_negative(FixedDec v, const char* name) {
  if (v.is_negative()) throw Error(ErrorCode::InvalidParameter, std::string(name) + " must be >= 0");
}

void require_threshold(FixedDec v, const char* name) {
  if (v <= FixedDec::zero() || v > FixedDec::one()) {
    throw Error(ErrorCode::InvalidParameter, std::string(name) + " must lie in (0, 1]");
  }
}

void require_fraction(FixedDec v, const char* name) {
  if (v.is_negative() || v > FixedDec::one()) {
    throw Error(ErrorCode::InvalidParameter, std::string(name) + " must lie in [0, 1]");
  }
}

// Shared two-slope curve for Aave variable and stable rates.
FixedDec two_slope(FixedDec base, const AaveVariableModel& m, FixedDec u) {
  if (u < m.u_optimal) return base + mul_div(u, m.r_slope1, m.u_optimal);
  // With u_optimal == 1 the excess term has a vanishing denominator; the
  // curve is pinned at base + R1 from U = 1 onwards.
  if (m.u_optimal == FixedDec::one()) return base + m.r_slope1;
  return base + m.r_slope1 + mul_div(u - m.u_optimal, m.r_slope2, FixedDec::one() - m.u_optimal);
}

}  // namespace

std::string_view model_name(const RateModel& model) {
  return std::visit(Overloaded{
                        [](const LinearModel&) { return std::string_view("linear"); },
                        [](const NonLinearModel&) { return std::string_view("nonlinear"); },
                        [](const KinkedModel&) { return std::string_view("kinked"); },
                        [](const AaveVariableModel&) { return std::string_view("aave"); },
                    },
                    model);
}

void validate(const RateModel& model) {
  std::visit(Overloaded{
                 [](const LinearModel& m) {
                   require_non_negative(m.alpha, "alpha");
                   require_non_negative(m.beta, "beta");
                 },
                 [](const NonLinearModel& m) {
                   require_non_negative(m.alpha, "alpha");
                   require_non_negative(m.beta, "beta");
                   require_non_negative(m.gamma, "gamma");
                   require_fraction(m.lambda, "lambda");
                 },
                 [](const KinkedModel& m) {
                   require_non_negative(m.alpha, "alpha");
                   require_non_negative(m.beta, "beta");
                   require_non_negative(m.gamma, "gamma");
                   require_threshold(m.u_star, "u_star");
                   require_fraction(m.lambda, "lambda");
                 },
                 [](const AaveVariableModel& m) {
                   require_non_negative(m.base, "base");
                   require_non_negative(m.r_slope1, "r_slope1");
                   require_non_negative(m.r_slope2, "r_slope2");
                   require_threshold(m.u_optimal, "u_optimal");
                 },
             },
             model);
}

std::optional<FixedDec> model_reserve_factor(const RateModel& model) {
  if (const auto* m = std::get_if<NonLinearModel>(&model)) return m->lambda;
  if (const auto* m = std::get_if<KinkedModel>(&model)) return m->lambda;
  return std::nullopt;
}

FixedDec utilization(FixedDec total_loans, FixedDec gross_deposits) {
  if (total_loans.is_negative() || gross_deposits.is_negative()) {
    throw Error(ErrorCode::IllFormedMarket, "negative loans or deposits");
  }
  if (gross_deposits.is_zero()) {
    if (total_loans.is_zero()) return FixedDec::zero();
    throw Error(ErrorCode::IllFormedMarket, "loans outstanding against zero deposits");
  }
  return div(total_loans, gross_deposits);
}

FixedDec borrow_rate(const RateModel& model, FixedDec u) {
  if (u.is_negative()) throw Error(ErrorCode::InvalidParameter, "utilization must be >= 0");
  return std::visit(Overloaded{
                        [u](const LinearModel& m) { return m.alpha + mul(m.beta, u); },
                        [u](const NonLinearModel& m) {
                          const FixedDec u32 = pow_u(u, 32);
                          const FixedDec u64 = mul(u32, u32);
                          const std::array<FixedDec, 3> coef{m.alpha, m.beta, m.gamma};
                          const std::array<FixedDec, 3> powers{u, u32, u64};
                          return dot(coef, powers);
                        },
                        [u](const KinkedModel& m) {
                          if (u <= m.u_star) return m.alpha + mul(m.beta, u);
                          const std::array<FixedDec, 2> coef{m.beta, m.gamma};
                          const std::array<FixedDec, 2> segments{m.u_star, u - m.u_star};
                          return m.alpha + dot(coef, segments);
                        },
                        [u](const AaveVariableModel& m) { return two_slope(m.base, m, u); },
                    },
                    model);
}

FixedDec saving_rate(const RateModel& model, FixedDec u) {
  const FixedDec ib = borrow_rate(model, u);
  return std::visit(Overloaded{
                        [&](const LinearModel&) { return mul(ib, u); },
                        [&](const NonLinearModel& m) { return mul(mul(FixedDec::one() - m.lambda, ib), u); },
                        [&](const KinkedModel& m) { return mul(u, mul(ib, FixedDec::one() - m.lambda)); },
                        [&](const AaveVariableModel&) -> FixedDec {
                          throw Error(ErrorCode::NotDefinedForModel, "no saving-rate formula for the aave model");
                        },
                    },
                    model);
}

FixedDec annualize(FixedDec per_block_rate, std::int64_t blocks_per_year) {
  return mul_int(per_block_rate, blocks_per_year);
}

FixedDec per_block(FixedDec annual_rate, std::int64_t blocks_per_year) {
  if (blocks_per_year <= 0) throw Error(ErrorCode::InvalidParameter, "blocks_per_year must be > 0");
  return div(annual_rate, FixedDec::from_int(blocks_per_year));
}

NonLinearModel default_nonlinear(std::int64_t blocks_per_year) {
  // Round-to-nearest per-block values; gamma absorbs the residual so the sum
  // is the nearest grid point to 0.5 / blocks_per_year.
  const Int128 bpy = blocks_per_year;
  auto nearest = [bpy](Int128 numerator) { return (2 * numerator + bpy) / (2 * bpy); };
  const Int128 total = nearest(FixedDec::kScale / 2);
  const Int128 alpha = nearest(FixedDec::kScale / 10);
  const Int128 beta = nearest(3 * FixedDec::kScale / 10);
  NonLinearModel m;
  m.alpha = FixedDec::from_mantissa(alpha);
  m.beta = FixedDec::from_mantissa(beta);
  m.gamma = FixedDec::from_mantissa(total - alpha - beta);
  m.lambda = FixedDec::parse("0.1");
  return m;
}

std::string_view to_string(RebalanceDecision d) {
  switch (d) {
    case RebalanceDecision::Up: return "up";
    case RebalanceDecision::Down: return "down";
    case RebalanceDecision::None: break;
  }
  return "none";
}

FixedDec market_rate(std::span<const PlatformBorrowState> platforms) {
  std::vector<FixedDec> rates;
  std::vector<FixedDec> weights;
  rates.reserve(platforms.size());
  weights.reserve(platforms.size());
  FixedDec total = FixedDec::zero();
  for (const auto& p : platforms) {
    if (p.borrowed.is_negative()) throw Error(ErrorCode::InvalidParameter, "negative borrowed amount");
    rates.push_back(p.borrow_rate);
    weights.push_back(p.borrowed);
    total += p.borrowed;
  }
  if (total.is_zero()) throw Error(ErrorCode::EmptyMarket, "no funds borrowed on any platform");
  return weighted_average(rates, weights);
}

FixedDec stable_rate(FixedDec market_rate, const AaveVariableModel& slopes, FixedDec u) {
  if (u.is_negative()) throw Error(ErrorCode::InvalidParameter, "utilization must be >= 0");
  return two_slope(market_rate, slopes, u);
}

RebalanceDecision rebalance_check(const StablePosition& pos, const BorrowBook& book, FixedDec latest_stable) {
  if (pos.window_blocks < 1) throw Error(ErrorCode::InvalidParameter, "adjustment window must be >= 1");
  const FixedDec total = book.variable_borrowed + book.stable_borrowed;
  if (total.is_zero()) throw Error(ErrorCode::EmptyMarket, "no variable or stable borrows in market");

  const std::array<FixedDec, 2> amounts{book.variable_borrowed, book.stable_borrowed};
  const std::array<FixedDec, 2> rates{book.variable_rate, book.stable_rate};
  // user_rate * total < sum(B * i), compared exactly
  if (compare_dot(amounts, rates, pos.user_rate, total) == std::strong_ordering::greater) {
    return RebalanceDecision::Up;
  }
  const std::array<FixedDec, 1> latest{latest_stable};
  const std::array<FixedDec, 1> factor{FixedDec::one() + pos.delta};
  if (compare_dot(latest, factor, pos.user_rate, FixedDec::one()) == std::strong_ordering::less) {
    return RebalanceDecision::Down;
  }
  return RebalanceDecision::None;
}

}  // namespace plf
