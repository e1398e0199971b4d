#pragma once

// Agent-based scenario engine driving one market over blocks.
//
// Per block, in order: scheduled model change, price update, accrual to the
// block, built-in liquidations of undercollateralized borrowers, then every
// agent (in a seeded random order) adjusts its position. Agents observe the
// rates recorded at the end of the previous block.
//
// Agent rule: a borrower's target debt is its full size while the observed
// annualized borrow rate is below its reservation rate and zero otherwise; a
// supplier's target deposit is its full size while the observed supply rate
// meets its required yield and zero otherwise. Each block the agent closes
// `responsiveness` of the gap to its target, plus noise_scale * size * z with
// z a standard normal truncated at +-2.5. Actions are clipped to what the
// market allows (cash, collateral, debt, shares) and positions never exceed
// the agent size.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plflab/fixed_point.hpp"
#include "plflab/market_engine.hpp"
#include "plflab/rate_models.hpp"

namespace plf {

enum class AgentKind { Supplier, Borrower };

struct AgentSpec {
  AgentKind kind = AgentKind::Borrower;
  FixedDec target_rate;  // annualized reservation borrow rate / required saving yield
  FixedDec size;
  FixedDec responsiveness = FixedDec::parse("0.05");
  FixedDec noise_scale;
  FixedDec initial_fraction;  // share of size held at block 0
  FixedDec collateral_ratio = FixedDec::parse("2");  // borrowers: collateral value posted per unit of size

  friend bool operator==(const AgentSpec&, const AgentSpec&) = default;
};

struct ScheduledModel {
  std::int64_t block = 0;
  RateModel model;
  std::string label;
};

struct PricePoint {
  std::int64_t block = 0;
  FixedDec price;

  friend bool operator==(const PricePoint&, const PricePoint&) = default;
};

struct Scenario {
  std::uint64_t rng_seed = 0;
  std::int64_t horizon_blocks = 0;
  std::int64_t blocks_per_year = kDefaultBlocksPerYear;
  std::vector<AgentSpec> agents;
  std::vector<ScheduledModel> model_schedule;  // first entry at block 0
  std::vector<PricePoint> price_path;          // collateral price, piecewise constant
  CeilingPolicy ceiling_policy = CeilingPolicy::Uncapped;
  FixedDec reserve_factor;  // used when the model family carries none
  LiquidationParams liquidation;

  /// Throws ScheduleConflict for two model changes at one block and
  /// InvalidScenario for other violations.
  void validate() const;
};

struct BlockSnapshot {
  std::int64_t block = 0;
  FixedDec gross_deposits;
  FixedDec total_loans;
  FixedDec reserves;
  FixedDec index;
  FixedDec utilization;
  FixedDec borrow_rate;  // per block
  FixedDec supply_rate;  // per block

  friend bool operator==(const BlockSnapshot&, const BlockSnapshot&) = default;
};

struct UtilizationStats {
  double bin_width = 0.02;
  double mode_bin_center = 0.0;
  double median = 0.0;
  double mean = 0.0;
  double std_dev = 0.0;
  double fraction_above_095 = 0.0;
  double mean_distance_from_one = 0.0;
  double fraction_in_080_090 = 0.0;
  double fraction_in_090_100 = 0.0;
  double fraction_at_or_above_100 = 0.0;
};

/// Histogram and band statistics of a utilization path. Bins are
/// [i*w, (i+1)*w); the mode reports the centre of the fullest bin (lowest on
/// ties).
UtilizationStats summarize_utilization(std::span<const double> u, double bin_width = 0.02);

/// Fraction of observations in [lo, hi].
double fraction_within(std::span<const double> u, double lo, double hi);

struct SimSummary {
  UtilizationStats utilization;
  double mean_borrow_rate_annual = 0.0;
  double mean_supply_rate_annual = 0.0;
  std::int64_t liquidations = 0;
  std::int64_t clipped_redeems = 0;  // supplier withdrawals limited by cash

  friend bool operator==(const SimSummary&, const SimSummary&) = default;
};

inline bool operator==(const UtilizationStats& a, const UtilizationStats& b) {
  return a.bin_width == b.bin_width && a.mode_bin_center == b.mode_bin_center && a.median == b.median &&
         a.mean == b.mean && a.std_dev == b.std_dev && a.fraction_above_095 == b.fraction_above_095 &&
         a.mean_distance_from_one == b.mean_distance_from_one && a.fraction_in_080_090 == b.fraction_in_080_090 &&
         a.fraction_in_090_100 == b.fraction_in_090_100 && a.fraction_at_or_above_100 == b.fraction_at_or_above_100;
}

struct SimOutput {
  std::vector<BlockSnapshot> series;  // one entry per block in [0, horizon)
  std::vector<Event> events;          // filled when RunOptions::record_events
  SimSummary summary;
  std::optional<MarketState> final_state;

  std::vector<double> utilization_path() const;
};

struct RunOptions {
  bool record_events = false;
  bool check_invariants = false;  // run MarketState::check_invariants after every block
};

SimOutput run(const Scenario& scenario, const RunOptions& options = {});

/// Returns a copy of `scenario` whose collateral price drops by `drop`
/// (fraction in [0, 1)) from `block` onwards. Throws BlockOutOfRange when
/// block lies outside [0, horizon).
Scenario shock(const Scenario& scenario, std::int64_t block, FixedDec drop);

struct ExperimentRow {
  std::string label;
  std::optional<double> kink;
  UtilizationStats utilization;
  double mean_borrow_rate_annual = 0.0;
  std::int64_t liquidations = 0;
};

/// Re-runs `base` once per candidate, replacing u_star in every kinked model
/// of the schedule. Runs execute concurrently; results are in input order.
std::vector<ExperimentRow> kink_placement_experiment(const Scenario& base, std::span<const FixedDec> kink_points);

/// Runs `base` and a copy with every scheduled model replaced by `alternative`.
std::vector<ExperimentRow> smooth_vs_kinked_experiment(const Scenario& base, const RateModel& alternative);

/// Non-linear model whose borrow rate at U = 1 equals the kinked model's,
/// split 20/60/20 across alpha/beta/gamma; reserve factor carried over.
NonLinearModel matched_nonlinear(const KinkedModel& kinked);

}  // namespace plf
