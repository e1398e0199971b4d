#pragma once

// Liquidity and concentration statistics: illiquidity bands over a
// utilization path, available liquidity, median locked value and cumulative
// fund-concentration curves.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace plf::analytics {

struct LiquidityPoint {
  double total_supply = 0.0;
  double total_borrows = 0.0;
  double available = 0.0;  // total_supply - total_borrows
  double utilization = 0.0;
};

/// U = L / A, 0 for an empty market.
std::vector<LiquidityPoint> liquidity_series(std::span<const double> total_supply, std::span<const double> total_borrows);

/// Bands are indexed from 0 for [t0, t1), ..., the last for [t_last, inf).
struct Band {
  std::size_t band = 0;
  std::size_t start = 0;  // inclusive index
  std::size_t end = 0;    // exclusive index
  friend bool operator==(const Band&, const Band&) = default;
};

/// Default band labels for thresholds {0.8, 0.9, 1.0}.
std::string_view band_label(std::size_t band);

/// Maximal runs of consecutive points falling in the same band; points below
/// the first threshold belong to no band. Thresholds must be strictly
/// increasing.
std::vector<Band> illiquidity_bands(std::span<const double> utilization,
                                    std::span<const double> thresholds = std::span<const double>());

struct Concentration {
  std::vector<double> balances;  // descending
  std::vector<double> curve;     // curve[k-1] = share of the k largest; last entry exactly 1
  double top_k_share(std::size_t k) const;
};

/// Throws EmptyInput for no balances, InvalidParameter for negative ones and
/// AllZero when nothing is locked.
Concentration concentration(std::span<const double> balances);

/// Mean of the middle two for even sizes. Throws EmptyInput.
double median_locked(std::span<const double> values);

}  // namespace plf::analytics
