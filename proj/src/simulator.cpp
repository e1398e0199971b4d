#include "plflab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include "plflab/rng.hpp"

namespace plf {

namespace {

constexpr double kNoiseBound = 2.5;
// Adjustments smaller than this share of an agent's size are skipped.
constexpr double kMinStepFraction = 1e-6;
// Agents only borrow while collateral stays above threshold * (1 + margin).
constexpr double kBorrowSafetyMargin = 0.1;

std::string agent_id(const AgentSpec& spec, std::size_t i) {
  return (spec.kind == AgentKind::Supplier ? "supplier_" : "borrower_") + std::to_string(i);
}

class Runner {
 public:
  Runner(const Scenario& scenario, const RunOptions& options)
      : scenario_(scenario),
        options_(options),
        rng_(scenario.rng_seed),
        state_(scenario.model_schedule.front().model, scenario.reserve_factor, scenario.ceiling_policy,
               scenario.liquidation, 0) {
    ids_.reserve(scenario.agents.size());
    for (std::size_t i = 0; i < scenario.agents.size(); ++i) ids_.push_back(agent_id(scenario.agents[i], i));
    order_.resize(scenario.agents.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
  }

  SimOutput run() {
    SimOutput out;
    out.series.reserve(static_cast<std::size_t>(scenario_.horizon_blocks));
    std::size_t next_model = 1;
    std::size_t next_price = 0;
    const FixedDec bpy = FixedDec::from_int(scenario_.blocks_per_year);

    for (std::int64_t block = 0; block < scenario_.horizon_blocks; ++block) {
      while (next_model < scenario_.model_schedule.size() && scenario_.model_schedule[next_model].block == block) {
        const auto& entry = scenario_.model_schedule[next_model];
        state_.set_model(block, entry.model);
        log({block, Action::SetModel, entry.label, FixedDec::zero()});
        ++next_model;
      }
      while (next_price < scenario_.price_path.size() && scenario_.price_path[next_price].block <= block) {
        const auto& p = scenario_.price_path[next_price];
        if (p.block == block || block == 0) {
          state_.set_price(block, p.price);
          log({block, Action::SetPrice, "", p.price});
        }
        ++next_price;
      }
      state_.accrue(block);

      if (block == 0) {
        initialize();
      } else {
        liquidate_unhealthy(block);
        step_agents(block);
      }

      BlockSnapshot snap;
      snap.block = block;
      snap.gross_deposits = state_.gross_deposits();
      snap.total_loans = state_.total_loans();
      snap.reserves = state_.reserves();
      snap.index = state_.index();
      snap.utilization = state_.utilization();
      snap.borrow_rate = state_.borrow_rate();
      snap.supply_rate = state_.supply_rate();
      observed_borrow_ = mul(snap.borrow_rate, bpy).to_double();
      observed_supply_ = mul(snap.supply_rate, bpy).to_double();
      out.series.push_back(snap);

      if (options_.check_invariants) state_.check_invariants();
    }

    std::vector<double> u = out.utilization_path();
    out.summary.utilization = summarize_utilization(u);
    double borrow_sum = 0.0;
    double supply_sum = 0.0;
    for (const auto& s : out.series) {
      borrow_sum += annualize(s.borrow_rate, scenario_.blocks_per_year).to_double();
      supply_sum += annualize(s.supply_rate, scenario_.blocks_per_year).to_double();
    }
    if (!out.series.empty()) {
      out.summary.mean_borrow_rate_annual = borrow_sum / static_cast<double>(out.series.size());
      out.summary.mean_supply_rate_annual = supply_sum / static_cast<double>(out.series.size());
    }
    out.summary.liquidations = liquidations_;
    out.summary.clipped_redeems = clipped_redeems_;
    out.events = std::move(events_);
    out.final_state = state_;
    return out;
  }

 private:
  void log(Event e) {
    if (options_.record_events) events_.push_back(std::move(e));
  }

  void initialize() {
    const FixedDec price = state_.collateral_price();
    for (std::size_t i = 0; i < scenario_.agents.size(); ++i) {
      const AgentSpec& a = scenario_.agents[i];
      if (a.kind == AgentKind::Supplier) {
        const FixedDec amount = mul(a.size, a.initial_fraction);
        if (amount > FixedDec::zero()) {
          state_.mint(0, ids_[i], amount);
          log({0, Action::Mint, ids_[i], amount});
        }
      }
    }
    for (std::size_t i = 0; i < scenario_.agents.size(); ++i) {
      const AgentSpec& a = scenario_.agents[i];
      if (a.kind != AgentKind::Borrower) continue;
      if (price > FixedDec::zero()) {
        const FixedDec collateral = div(mul(a.size, a.collateral_ratio), price);
        if (collateral > FixedDec::zero()) {
          state_.post_collateral(0, ids_[i], collateral);
          log({0, Action::PostCollateral, ids_[i], collateral});
        }
      }
      FixedDec amount = min(mul(a.size, a.initial_fraction), borrow_headroom(ids_[i]));
      if (amount > FixedDec::zero()) {
        state_.borrow(0, ids_[i], amount);
        log({0, Action::Borrow, ids_[i], amount});
      }
    }
  }

  FixedDec borrow_headroom(const AccountId& id) const {
    const FixedDec debt = state_.debt_of(id);
    const FixedDec required = mul(state_.liquidation_params().threshold, FixedDec::from_double(1.0 + kBorrowSafetyMargin));
    const FixedDec capacity = div(state_.collateral_value_of(id), required);
    // One mantissa unit of slack absorbs the floor in the capacity division.
    const FixedDec room = capacity - debt - FixedDec::from_mantissa(1);
    return max(FixedDec::zero(), min(room, state_.cash()));
  }

  void liquidate_unhealthy(std::int64_t block) {
    const auto& params = state_.liquidation_params();
    for (std::size_t i = 0; i < scenario_.agents.size(); ++i) {
      if (scenario_.agents[i].kind != AgentKind::Borrower) continue;
      const AccountId& id = ids_[i];
      if (!state_.is_undercollateralized(id)) continue;
      const FixedDec repay = mul(params.close_factor, state_.debt_of(id));
      if (repay <= FixedDec::zero()) continue;
      state_.liquidate(block, std::string(kLiquidatorAccount), id, repay);
      log({block, Action::Liquidate, id, repay});
      ++liquidations_;
    }
  }

  void step_agents(std::int64_t block) {
    // Fisher-Yates with the scenario RNG.
    for (std::size_t i = order_.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng_.next_u64() % i);
      std::swap(order_[i - 1], order_[j]);
    }
    for (std::size_t idx : order_) {
      const AgentSpec& a = scenario_.agents[idx];
      const double z = rng_.truncated_normal(kNoiseBound);
      const double size = a.size.to_double();
      const double target_rate = a.target_rate.to_double();
      const double resp = a.responsiveness.to_double();
      const double noise = a.noise_scale.to_double() * size * z;
      if (a.kind == AgentKind::Borrower) {
        const double debt = state_.debt_of(ids_[idx]).to_double();
        const double target = observed_borrow_ < target_rate ? size : 0.0;
        const double delta = std::min(resp * (target - debt) + noise, size - debt);
        act_borrower(block, ids_[idx], delta, size);
      } else {
        const Position* pos = state_.position(ids_[idx]);
        const double held = pos == nullptr ? 0.0 : mul(pos->supplied_shares, state_.exchange_rate()).to_double();
        const double target = observed_supply_ >= target_rate ? size : 0.0;
        const double delta = std::min(resp * (target - held) + noise, size - held);
        act_supplier(block, ids_[idx], delta, size);
      }
    }
  }

  void act_borrower(std::int64_t block, const AccountId& id, double delta, double size) {
    if (std::fabs(delta) < kMinStepFraction * size) return;
    if (delta > 0) {
      const FixedDec amount = min(FixedDec::from_double(delta), borrow_headroom(id));
      if (amount <= FixedDec::zero()) return;
      state_.borrow(block, id, amount);
      log({block, Action::Borrow, id, amount});
    } else {
      const FixedDec amount = min(FixedDec::from_double(-delta), state_.debt_of(id));
      if (amount <= FixedDec::zero()) return;
      state_.repay(block, id, amount);
      log({block, Action::Repay, id, amount});
    }
  }

  void act_supplier(std::int64_t block, const AccountId& id, double delta, double size) {
    if (std::fabs(delta) < kMinStepFraction * size) return;
    if (delta > 0) {
      const FixedDec amount = FixedDec::from_double(delta);
      if (amount <= FixedDec::zero()) return;
      state_.mint(block, id, amount);
      log({block, Action::Mint, id, amount});
      return;
    }
    const Position* pos = state_.position(id);
    if (pos == nullptr || pos->supplied_shares.is_zero()) return;
    const FixedDec rate = state_.exchange_rate();
    FixedDec shares = min(div(FixedDec::from_double(-delta), rate), pos->supplied_shares);
    // Withdrawals are limited to cash on hand.
    const FixedDec max_shares =
        mul_div(state_.cash(), state_.derivative_supply(), state_.gross_deposits() - state_.reserves());
    if (shares > max_shares) {
      shares = max_shares;
      ++clipped_redeems_;
    }
    if (shares <= FixedDec::zero()) return;
    state_.redeem(block, id, shares);
    log({block, Action::Redeem, id, shares});
  }

  const Scenario& scenario_;
  RunOptions options_;
  Rng rng_;
  MarketState state_;
  std::vector<AccountId> ids_;
  std::vector<std::size_t> order_;
  std::vector<Event> events_;
  double observed_borrow_ = 0.0;
  double observed_supply_ = 0.0;
  std::int64_t liquidations_ = 0;
  std::int64_t clipped_redeems_ = 0;
};

ExperimentRow make_row(std::string label, std::optional<double> kink, const SimOutput& out) {
  ExperimentRow row;
  row.label = std::move(label);
  row.kink = kink;
  row.utilization = out.summary.utilization;
  row.mean_borrow_rate_annual = out.summary.mean_borrow_rate_annual;
  row.liquidations = out.summary.liquidations;
  return row;
}

}  // namespace

void Scenario::validate() const {
  if (horizon_blocks < 1) throw Error(ErrorCode::InvalidScenario, "horizon_blocks must be >= 1");
  if (blocks_per_year <= 0) throw Error(ErrorCode::InvalidScenario, "blocks_per_year must be > 0");
  if (model_schedule.empty()) throw Error(ErrorCode::InvalidScenario, "model_schedule is empty");
  if (model_schedule.front().block != 0) throw Error(ErrorCode::InvalidScenario, "first model must start at block 0");
  for (std::size_t i = 1; i < model_schedule.size(); ++i) {
    if (model_schedule[i].block == model_schedule[i - 1].block) {
      throw Error(ErrorCode::ScheduleConflict,
                  "two model changes at block " + std::to_string(model_schedule[i].block));
    }
    if (model_schedule[i].block < model_schedule[i - 1].block) {
      throw Error(ErrorCode::InvalidScenario, "model_schedule blocks must be strictly increasing");
    }
  }
  for (const auto& m : model_schedule) plf::validate(m.model);
  for (std::size_t i = 0; i < price_path.size(); ++i) {
    if (price_path[i].price.is_negative()) throw Error(ErrorCode::InvalidScenario, "negative price");
    if (i > 0 && price_path[i].block <= price_path[i - 1].block) {
      throw Error(ErrorCode::InvalidScenario, "price_path blocks must be strictly increasing");
    }
  }
  for (const auto& a : agents) {
    if (a.size <= FixedDec::zero()) throw Error(ErrorCode::InvalidScenario, "agent size must be > 0");
    if (a.responsiveness <= FixedDec::zero() || a.responsiveness > FixedDec::one()) {
      throw Error(ErrorCode::InvalidScenario, "agent responsiveness must lie in (0, 1]");
    }
    if (a.noise_scale.is_negative()) throw Error(ErrorCode::InvalidScenario, "noise_scale must be >= 0");
    if (a.initial_fraction.is_negative() || a.initial_fraction > FixedDec::one()) {
      throw Error(ErrorCode::InvalidScenario, "initial_fraction must lie in [0, 1]");
    }
    if (a.collateral_ratio.is_negative()) throw Error(ErrorCode::InvalidScenario, "collateral_ratio must be >= 0");
  }
  if (reserve_factor.is_negative() || reserve_factor > FixedDec::one()) {
    throw Error(ErrorCode::InvalidScenario, "reserve_factor must lie in [0, 1]");
  }
  liquidation.validate();
}

std::vector<double> SimOutput::utilization_path() const {
  std::vector<double> u;
  u.reserve(series.size());
  for (const auto& s : series) u.push_back(s.utilization.to_double());
  return u;
}

double fraction_within(std::span<const double> u, double lo, double hi) {
  if (u.empty()) return 0.0;
  const auto n = std::count_if(u.begin(), u.end(), [=](double x) { return x >= lo && x <= hi; });
  return static_cast<double>(n) / static_cast<double>(u.size());
}

UtilizationStats summarize_utilization(std::span<const double> u, double bin_width) {
  UtilizationStats s;
  s.bin_width = bin_width;
  if (u.empty()) return s;
  const double n = static_cast<double>(u.size());

  std::vector<std::int64_t> counts;
  for (double x : u) {
    const auto bin = static_cast<std::size_t>(std::max(0.0, std::floor(x / bin_width)));
    if (bin >= counts.size()) counts.resize(bin + 1, 0);
    ++counts[bin];
  }
  const auto mode = std::max_element(counts.begin(), counts.end()) - counts.begin();
  s.mode_bin_center = std::round((static_cast<double>(mode) + 0.5) * bin_width * 1e12) / 1e12;

  std::vector<double> sorted(u.begin(), u.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  s.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);

  double sum = 0.0;
  double dist = 0.0;
  std::int64_t above = 0, b1 = 0, b2 = 0, b3 = 0;
  for (double x : u) {
    sum += x;
    dist += std::fabs(1.0 - x);
    if (x > 0.95) ++above;
    if (x >= 0.8 && x < 0.9) ++b1;
    else if (x >= 0.9 && x < 1.0) ++b2;
    else if (x >= 1.0) ++b3;
  }
  s.mean = sum / n;
  double ss = 0.0;
  for (double x : u) ss += (x - s.mean) * (x - s.mean);
  s.std_dev = std::sqrt(ss / n);
  s.mean_distance_from_one = dist / n;
  s.fraction_above_095 = static_cast<double>(above) / n;
  s.fraction_in_080_090 = static_cast<double>(b1) / n;
  s.fraction_in_090_100 = static_cast<double>(b2) / n;
  s.fraction_at_or_above_100 = static_cast<double>(b3) / n;
  return s;
}

SimOutput run(const Scenario& scenario, const RunOptions& options) {
  scenario.validate();
  Runner runner(scenario, options);
  return runner.run();
}

Scenario shock(const Scenario& scenario, std::int64_t block, FixedDec drop) {
  if (block < 0 || block >= scenario.horizon_blocks) {
    throw Error(ErrorCode::BlockOutOfRange, "shock block " + std::to_string(block) + " outside horizon");
  }
  if (drop.is_negative() || drop >= FixedDec::one()) {
    throw Error(ErrorCode::InvalidParameter, "price drop must lie in [0, 1)");
  }
  Scenario out = scenario;
  if (drop.is_zero()) return out;
  const FixedDec keep = FixedDec::one() - drop;

  std::vector<PricePoint> path;
  FixedDec current = FixedDec::one();
  bool inserted = false;
  for (const auto& p : scenario.price_path) {
    if (p.block < block) {
      current = p.price;
      path.push_back(p);
      continue;
    }
    if (!inserted && p.block > block) {
      path.push_back({block, mul(current, keep)});
      inserted = true;
    }
    path.push_back({p.block, mul(p.price, keep)});
    inserted = inserted || p.block == block;
  }
  if (!inserted) path.push_back({block, mul(current, keep)});
  out.price_path = std::move(path);
  return out;
}

std::vector<ExperimentRow> kink_placement_experiment(const Scenario& base, std::span<const FixedDec> kink_points) {
  base.validate();
  const bool has_kink = std::any_of(base.model_schedule.begin(), base.model_schedule.end(),
                                    [](const ScheduledModel& m) { return std::holds_alternative<KinkedModel>(m.model); });
  if (!has_kink) throw Error(ErrorCode::InvalidScenario, "kink placement needs a kinked model in the schedule");

  std::vector<std::future<ExperimentRow>> jobs;
  for (const FixedDec kink : kink_points) {
    Scenario variant = base;
    for (auto& entry : variant.model_schedule) {
      if (auto* k = std::get_if<KinkedModel>(&entry.model)) k->u_star = kink;
    }
    jobs.push_back(std::async(std::launch::async, [v = std::move(variant), kink]() {
      const SimOutput out = run(v);
      std::string text = kink.to_string();
      text.erase(text.find_last_not_of('0') + 1);
      if (text.back() == '.') text.pop_back();
      return make_row("kink=" + text, kink.to_double(), out);
    }));
  }
  std::vector<ExperimentRow> rows;
  rows.reserve(jobs.size());
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

std::vector<ExperimentRow> smooth_vs_kinked_experiment(const Scenario& base, const RateModel& alternative) {
  base.validate();
  Scenario alt = base;
  for (auto& entry : alt.model_schedule) entry.model = alternative;
  auto kink_of = [](const Scenario& s) -> std::optional<double> {
    if (const auto* k = std::get_if<KinkedModel>(&s.model_schedule.front().model)) return k->u_star.to_double();
    return std::nullopt;
  };
  auto base_job = std::async(std::launch::async, [&base]() { return run(base); });
  auto alt_job = std::async(std::launch::async, [&alt]() { return run(alt); });
  std::vector<ExperimentRow> rows;
  rows.push_back(make_row(std::string("base:") + std::string(model_name(base.model_schedule.front().model)),
                          kink_of(base), base_job.get()));
  rows.push_back(make_row(std::string("alternative:") + std::string(model_name(alternative)), kink_of(alt),
                          alt_job.get()));
  return rows;
}

NonLinearModel matched_nonlinear(const KinkedModel& kinked) {
  const FixedDec ceiling = borrow_rate(RateModel{kinked}, FixedDec::one());
  NonLinearModel m;
  m.alpha = mul(ceiling, FixedDec::parse("0.2"));
  m.beta = mul(ceiling, FixedDec::parse("0.6"));
  m.gamma = ceiling - m.alpha - m.beta;
  m.lambda = kinked.lambda;
  return m;
}

}  // namespace plf
