#pragma once

// Synthetic rate panel for demos and end-to-end checks.
//   * DAI borrow rates on compound, aave and dydx follow the reference
//     three-series error-correction system (two cointegrating relations).
//   * compound also quotes ETH and USDC; token prices move so that UIP holds
//     exactly up to noise: d log p_m = -iota_m / 365 + noise.
//   * Utilization follows a bounded AR(1) that visits the 80-100% bands.

#include <cstdint>
#include <vector>

#include "plflab/io.hpp"

namespace plf {

struct SyntheticPanelOptions {
  std::uint64_t seed = 2020;
  std::size_t days = 400;
  std::int64_t first_day = 18247;  // 2019-12-17
  double price_noise = 2e-5;       // daily log-price noise
};

std::vector<io::PanelRow> synthetic_panel(const SyntheticPanelOptions& opts = {});

}  // namespace plf
