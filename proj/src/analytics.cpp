#include "plflab/analytics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>

#include "plflab/error.hpp"

namespace plf::analytics {

namespace {

constexpr std::array<double, 3> kDefaultThresholds{0.8, 0.9, 1.0};

}  // namespace

std::vector<LiquidityPoint> liquidity_series(std::span<const double> total_supply,
                                             std::span<const double> total_borrows) {
  if (total_supply.size() != total_borrows.size()) {
    throw Error(ErrorCode::InvalidParameter, "supply and borrow series differ in length");
  }
  std::vector<LiquidityPoint> out;
  out.reserve(total_supply.size());
  for (std::size_t i = 0; i < total_supply.size(); ++i) {
    LiquidityPoint p;
    p.total_supply = total_supply[i];
    p.total_borrows = total_borrows[i];
    p.available = p.total_supply - p.total_borrows;
    p.utilization = p.total_supply > 0.0 ? p.total_borrows / p.total_supply : 0.0;
    out.push_back(p);
  }
  return out;
}

std::string_view band_label(std::size_t band) {
  switch (band) {
    case 0:
      return "80-90%";
    case 1:
      return "90-100%";
    case 2:
      return ">=100%";
    default:
      return "band";
  }
}

std::vector<Band> illiquidity_bands(std::span<const double> utilization, std::span<const double> thresholds) {
  if (thresholds.empty()) thresholds = kDefaultThresholds;
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > thresholds[i - 1])) {
      throw Error(ErrorCode::InvalidParameter, "band thresholds must be strictly increasing");
    }
  }
  auto band_of = [&](double u) -> std::ptrdiff_t {
    // Index of the last threshold <= u, or -1.
    const auto it = std::upper_bound(thresholds.begin(), thresholds.end(), u);
    return (it - thresholds.begin()) - 1;
  };
  std::vector<Band> out;
  std::size_t i = 0;
  while (i < utilization.size()) {
    const auto b = band_of(utilization[i]);
    std::size_t j = i + 1;
    while (j < utilization.size() && band_of(utilization[j]) == b) ++j;
    if (b >= 0) out.push_back({static_cast<std::size_t>(b), i, j});
    i = j;
  }
  return out;
}

double Concentration::top_k_share(std::size_t k) const {
  if (k == 0) return 0.0;
  if (k >= curve.size()) return 1.0;
  return curve[k - 1];
}

Concentration concentration(std::span<const double> balances) {
  if (balances.empty()) throw Error(ErrorCode::EmptyInput, "no balances");
  for (double b : balances) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw Error(ErrorCode::InvalidParameter, "balances must be finite and >= 0");
  }
  Concentration c;
  c.balances.assign(balances.begin(), balances.end());
  std::sort(c.balances.begin(), c.balances.end(), std::greater<>());
  double total = 0.0;
  for (double b : c.balances) total += b;
  if (total == 0.0) throw Error(ErrorCode::AllZero, "all balances are zero");
  double running = 0.0;
  c.curve.reserve(c.balances.size());
  for (double b : c.balances) {
    running += b;
    c.curve.push_back(std::min(1.0, running / total));
  }
  c.curve.back() = 1.0;
  return c;
}

double median_locked(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "median of an empty series");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace plf::analytics
