#include "plflab/synthetic_panel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "plflab/econometrics/synthetic.hpp"
#include "plflab/rng.hpp"

namespace plf {

std::vector<io::PanelRow> synthetic_panel(const SyntheticPanelOptions& opts) {
  Rng rng(opts.seed);
  const std::size_t n = opts.days;
  const Eigen::MatrixXd dai = econ::simulate_vecm(econ::reference_vecm_spec(0.0008), n, rng, 50, 0.08);

  struct Market {
    std::string platform;
    std::string market;
    double mean_rate;
    double base_price;
  };
  const std::vector<Market> markets{{"compound", "DAI", 0.0, 1.0}, {"aave", "DAI", 0.0, 1.0},
                                    {"dydx", "DAI", 0.0, 1.0},     {"compound", "ETH", 0.02, 150.0},
                                    {"compound", "USDC", 0.04, 1.0}};
  std::vector<io::PanelRow> rows;
  std::vector<double> log_price(markets.size());
  std::vector<double> extra_rate(markets.size());
  std::vector<double> util(markets.size());
  for (std::size_t m = 0; m < markets.size(); ++m) {
    log_price[m] = std::log(markets[m].base_price);
    extra_rate[m] = markets[m].mean_rate;
    util[m] = 0.7;
  }
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t m = 0; m < markets.size(); ++m) {
      double rate = 0.0;
      if (m < 3) {
        rate = dai(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(m));
      } else {
        extra_rate[m] = markets[m].mean_rate + 0.8 * (extra_rate[m] - markets[m].mean_rate) + 0.01 * rng.normal();
        rate = extra_rate[m];
      }
      util[m] = std::clamp(0.85 + 0.95 * (util[m] - 0.85) + 0.03 * rng.normal(), 0.3, 1.05);
      io::PanelRow r;
      r.day = opts.first_day + static_cast<std::int64_t>(t);
      r.platform = markets[m].platform;
      r.market = markets[m].market;
      r.borrow_rate = rate;
      r.supply_rate = rate * std::min(util[m], 1.0) * 0.9;
      r.total_supply = 1e6 * (1.0 + 0.001 * static_cast<double>(t));
      r.total_borrows = r.total_supply * util[m];
      if (m == 0 || m >= 3) r.price = std::exp(log_price[m]);
      rows.push_back(std::move(r));
      // Prices for the next day; DAI on compound is the numeraire drift-free leg.
      log_price[m] += -rate / 365.0 + opts.price_noise * rng.normal();
    }
  }
  return rows;
}

}  // namespace plf
