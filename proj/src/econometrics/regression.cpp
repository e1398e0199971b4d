#include "plflab/econometrics/regression.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "plflab/error.hpp"

namespace plf::econ {

namespace {

double normal_two_sided(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

}  // namespace

double chi2_sf(double stat, int df) {
  if (df <= 0) throw Error(ErrorCode::InvalidParameter, "chi-square needs df > 0");
  if (!(stat > 0.0)) return 1.0;
  if (df == 1) return std::erfc(std::sqrt(stat / 2.0));
  if (df == 2) return std::exp(-stat / 2.0);
  return boost::math::gamma_q(df / 2.0, stat / 2.0);
}

OlsFit ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.rows()) throw Error(ErrorCode::InvalidParameter, "design and response differ in length");
  if (x.rows() < x.cols()) throw Error(ErrorCode::InsufficientObservations, "fewer observations than regressors");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols()) throw Error(ErrorCode::SingularDesign, "design matrix is rank deficient");
  OlsFit fit;
  fit.n = static_cast<std::size_t>(x.rows());
  fit.coef = qr.solve(y);
  fit.residuals = y - x * fit.coef;
  const Eigen::MatrixXd xtx = x.transpose() * x;
  fit.xtx_inv = xtx.ldlt().solve(Eigen::MatrixXd::Identity(x.cols(), x.cols()));
  const double ybar = y.mean();
  const double tss = (y.array() - ybar).square().sum();
  fit.r_squared = tss > 0.0 ? 1.0 - fit.residuals.squaredNorm() / tss : 0.0;
  return fit;
}

Eigen::MatrixXd newey_west(const Eigen::MatrixXd& x, const Eigen::VectorXd& residuals, int lags) {
  const Eigen::Index n = x.rows();
  if (lags < 0 || lags >= n) {
    throw Error(ErrorCode::InvalidParameter, "hac lags must lie in [0, n), got " + std::to_string(lags));
  }
  const Eigen::MatrixXd xtx = x.transpose() * x;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularDesign, "X'X is singular");
  const Eigen::MatrixXd bread = lu.inverse();

  // Scores u_t = x_t e_t, one per row.
  const Eigen::MatrixXd u = x.array().colwise() * residuals.array();
  Eigen::MatrixXd s = u.transpose() * u;
  for (int l = 1; l <= lags; ++l) {
    const double w = 1.0 - static_cast<double>(l) / static_cast<double>(lags + 1);
    const Eigen::MatrixXd g = u.bottomRows(n - l).transpose() * u.topRows(n - l);
    s += w * (g + g.transpose());
  }
  Eigen::MatrixXd cov = bread * s * bread;
  return 0.5 * (cov + cov.transpose());
}

Eigen::MatrixXd white_cov(const Eigen::MatrixXd& x, const Eigen::VectorXd& residuals) {
  const Eigen::MatrixXd xtx = x.transpose() * x;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularDesign, "X'X is singular");
  const Eigen::MatrixXd bread = lu.inverse();
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(x.cols(), x.cols());
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    meat.noalias() += residuals(t) * residuals(t) * x.row(t).transpose() * x.row(t);
  }
  Eigen::MatrixXd cov = bread * meat * bread;
  return 0.5 * (cov + cov.transpose());
}

Eigen::MatrixXd classical_cov(const Eigen::MatrixXd& x, const Eigen::VectorXd& residuals) {
  const auto n = x.rows();
  const auto k = x.cols();
  if (n <= k) throw Error(ErrorCode::InsufficientObservations, "no residual degrees of freedom");
  const Eigen::MatrixXd xtx = x.transpose() * x;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularDesign, "X'X is singular");
  return residuals.squaredNorm() / static_cast<double>(n - k) * lu.inverse();
}

int default_hac_lags(std::size_t n) {
  return static_cast<int>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

RegressionResult regress_with_hac(std::span<const double> y, std::span<const double> x,
                                  std::optional<int> hac_lags) {
  if (y.size() != x.size()) throw Error(ErrorCode::InvalidParameter, "y and x differ in length");
  const std::size_t n = y.size();
  if (n < 10) {
    throw Error(ErrorCode::InsufficientObservations, "need at least 10 observations, got " + std::to_string(n));
  }
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) {
    throw Error(ErrorCode::DegenerateRegressor, "regressor has zero variance");
  }
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd yy(n);
  for (std::size_t t = 0; t < n; ++t) {
    design(t, 0) = 1.0;
    design(t, 1) = x[t];
    yy(t) = y[t];
  }
  const OlsFit fit = ols(design, yy);
  const int lags = hac_lags.value_or(default_hac_lags(n));
  const Eigen::MatrixXd cov = newey_west(design, fit.residuals, lags);

  RegressionResult r;
  r.alpha_hat = fit.coef(0);
  r.beta_hat = fit.coef(1);
  r.hac_cov = cov;
  r.n_obs = n;
  r.hac_lags = lags;
  r.r_squared = fit.r_squared;
  r.se_alpha = std::sqrt(std::max(0.0, cov(0, 0)));
  r.se_beta = std::sqrt(std::max(0.0, cov(1, 1)));
  r.p_alpha = r.se_alpha > 0.0 ? normal_two_sided(r.alpha_hat / r.se_alpha) : (r.alpha_hat == 0.0 ? 1.0 : 0.0);
  r.p_beta = r.se_beta > 0.0 ? normal_two_sided(r.beta_hat / r.se_beta) : (r.beta_hat == 0.0 ? 1.0 : 0.0);

  const Eigen::Vector2d d(r.alpha_hat, r.beta_hat - 1.0);
  Eigen::FullPivLU<Eigen::Matrix2d> lu(r.hac_cov);
  if (lu.isInvertible()) {
    r.wald_strict = d.dot(lu.solve(d));
  } else {
    r.wald_strict = d.squaredNorm() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  if (cov(1, 1) > 0.0) {
    r.wald_weak = d(1) * d(1) / cov(1, 1);
  } else {
    r.wald_weak = d(1) == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  r.p_strict = chi2_sf(r.wald_strict, 2);
  r.p_weak = chi2_sf(r.wald_weak, 1);
  return r;
}

RegressionResult uip_regress(std::span<const double> exchange, std::span<const double> iota_i,
                             std::span<const double> iota_j, std::optional<int> hac_lags) {
  if (exchange.size() != iota_i.size() || exchange.size() != iota_j.size()) {
    throw Error(ErrorCode::InvalidParameter, "series are not aligned");
  }
  if (exchange.size() < 11) {
    throw Error(ErrorCode::InsufficientObservations,
                "need at least 10 observations, got " + std::to_string(exchange.empty() ? 0 : exchange.size() - 1));
  }
  for (double s : exchange) {
    if (!(s > 0.0)) throw Error(ErrorCode::InvalidParameter, "exchange rate must be strictly positive");
  }
  const std::size_t n = exchange.size() - 1;
  std::vector<double> y(n);
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) {
    y[t] = std::log(exchange[t + 1]) - std::log(exchange[t]);
    x[t] = iota_i[t] - iota_j[t];
  }
  return regress_with_hac(y, x, hac_lags);
}

}  // namespace plf::econ
