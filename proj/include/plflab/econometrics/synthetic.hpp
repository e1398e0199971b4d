#pragma once

// Seeded data generators for estimator checks, and a replication harness that
// fans out across threads with seeds derive_seed(root, i).

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <future>
#include <thread>
#include <vector>

#include "plflab/rng.hpp"

namespace plf::econ {

struct UipSample {
  std::vector<double> exchange;  // S_t levels
  std::vector<double> iota_i;    // per-period rates
  std::vector<double> iota_j;
};

/// n + 1 levels so that the regression has n observations:
/// s_{t+1} - s_t = alpha + beta (iota_i - iota_j)_t + noise_sd z.
/// Rates are base + rate_sd z, iid.
UipSample simulate_uip(std::size_t n, double alpha, double beta, Rng& rng, double noise_sd = 0.01,
                       double rate_sd = 0.01);

struct Ar1RegressionSample {
  std::vector<double> y;
  std::vector<double> x;
};

/// y = a + b x + u with x and u independent Gaussian AR(1) processes (unit
/// innovation variance for x, noise_sd for u), started from stationarity.
Ar1RegressionSample simulate_ar1_regression(std::size_t n, double a, double b, double rho_x, double rho_u, Rng& rng,
                                            double noise_sd = 1.0);

struct VecmSpec {
  Eigen::MatrixXd alpha;  // K x r
  Eigen::MatrixXd beta;   // K x r
  Eigen::VectorXd rho;    // r
  std::vector<Eigen::MatrixXd> gamma;
  Eigen::MatrixXd sigma;  // innovation covariance
};

/// Three series with two cointegrating relations (one common trend):
/// beta columns (1, 0, -1.151) and (0, 1, -0.991), constants (0.0296, 0.0051),
/// alpha rows (0, 0), (0.38, -0.533), (0.28, -0.0387); innovations with
/// standard deviation sd and correlation 0.3.
VecmSpec reference_vecm_spec(double sd = 0.01);

/// Simulates n levels after `burn` discarded steps, started on the attractor
/// beta' y + rho = 0 at level `start` for the common trend.
Eigen::MatrixXd simulate_vecm(const VecmSpec& spec, std::size_t n, Rng& rng, std::size_t burn = 200,
                              double start = 0.05);

/// Level VAR y_t = c + sum A_i y_{t-i} + e_t.
Eigen::MatrixXd simulate_var(const std::vector<Eigen::MatrixXd>& a, const Eigen::VectorXd& c,
                             const Eigen::MatrixXd& sigma, std::size_t n, Rng& rng, std::size_t burn = 200);

/// Multivariate normal draws with covariance sigma, one per row.
Eigen::MatrixXd gaussian_noise(const Eigen::MatrixXd& sigma, std::size_t n, Rng& rng);

/// Runs f(i, rng) for i in [0, reps) with rng seeded by derive_seed(root, i);
/// results are returned in replication order regardless of thread count.
template <class F>
auto monte_carlo(std::size_t reps, std::uint64_t root_seed, F f, unsigned threads = 0) {
  using R = decltype(f(std::size_t{0}, std::declval<Rng&>()));
  std::vector<R> out(reps);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(reps, 1)));
  std::vector<std::future<void>> jobs;
  for (unsigned w = 0; w < threads; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w]() {
      for (std::size_t i = w; i < reps; i += threads) {
        Rng rng(derive_seed(root_seed, i));
        out[i] = f(i, rng);
      }
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

}  // namespace plf::econ
