#pragma once

// OLS with heteroskedasticity/autocorrelation-robust covariance and the UIP
// regression s_{t+1} - s_t = alpha + beta (iota_i - iota_j) + e.

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>

namespace plf::econ {

struct OlsFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd xtx_inv;
  double r_squared = 0.0;
  std::size_t n = 0;
};

/// Throws SingularDesign when X lacks full column rank.
OlsFit ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Bartlett-kernel HAC covariance of the OLS coefficients:
/// (X'X)^-1 S (X'X)^-1 with S = G0 + sum_l (1 - l/(L+1)) (Gl + Gl'),
/// Gl = sum_t e_t e_{t-l} x_t x_{t-l}'. No small-sample scaling.
Eigen::MatrixXd newey_west(const Eigen::MatrixXd& x, const Eigen::VectorXd& residuals, int lags);

/// Heteroskedasticity-only sandwich (X'X)^-1 X' diag(e^2) X (X'X)^-1.
Eigen::MatrixXd white_cov(const Eigen::MatrixXd& x, const Eigen::VectorXd& residuals);

/// s^2 (X'X)^-1 with s^2 = e'e / (n - k).
Eigen::MatrixXd classical_cov(const Eigen::MatrixXd& x, const Eigen::VectorXd& residuals);

/// floor(4 (n/100)^(2/9))
int default_hac_lags(std::size_t n);

struct RegressionResult {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  Eigen::Matrix2d hac_cov = Eigen::Matrix2d::Zero();
  std::size_t n_obs = 0;
  int hac_lags = 0;
  double r_squared = 0.0;
  double se_alpha = 0.0;
  double se_beta = 0.0;
  double p_alpha = 1.0;  // H0: alpha = 0
  double p_beta = 1.0;   // H0: beta = 0
  double wald_strict = 0.0;
  double wald_weak = 0.0;
  double p_strict = 1.0;  // alpha = 0 and beta = 1, chi2(2)
  double p_weak = 1.0;    // beta = 1, chi2(1)
};

/// Regression of y on [1, x]; used directly by Monte Carlo checks.
RegressionResult regress_with_hac(std::span<const double> y, std::span<const double> x,
                                  std::optional<int> hac_lags = std::nullopt);

/// `exchange` holds S_t levels (strictly positive), the rates are per-period.
/// Uses t = 0..T-2: dependent s_{t+1} - s_t, regressor iota_i,t - iota_j,t.
/// Throws InsufficientObservations (fewer than 10 observations) and
/// DegenerateRegressor (constant interest differential).
RegressionResult uip_regress(std::span<const double> exchange, std::span<const double> iota_i,
                             std::span<const double> iota_j, std::optional<int> hac_lags = std::nullopt);

/// Upper-tail chi-square probabilities.
double chi2_sf(double stat, int df);

}  // namespace plf::econ
