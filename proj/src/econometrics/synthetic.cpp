#include "plflab/econometrics/synthetic.hpp"

#include <cmath>

#include "plflab/error.hpp"

namespace plf::econ {

Eigen::MatrixXd gaussian_noise(const Eigen::MatrixXd& sigma, std::size_t n, Rng& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::NonPsdCovariance, "noise covariance is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  const auto k = sigma.rows();
  Eigen::MatrixXd z(static_cast<Eigen::Index>(n), k);
  for (Eigen::Index t = 0; t < z.rows(); ++t) {
    for (Eigen::Index j = 0; j < k; ++j) z(t, j) = rng.normal();
  }
  return z * l.transpose();
}

UipSample simulate_uip(std::size_t n, double alpha, double beta, Rng& rng, double noise_sd, double rate_sd) {
  UipSample s;
  s.exchange.resize(n + 1);
  s.iota_i.resize(n + 1);
  s.iota_j.resize(n + 1);
  double log_s = 0.0;
  for (std::size_t t = 0; t <= n; ++t) {
    s.iota_i[t] = 0.0002 + rate_sd * rng.normal();
    s.iota_j[t] = 0.0001 + rate_sd * rng.normal();
    s.exchange[t] = std::exp(log_s);
    log_s += alpha + beta * (s.iota_i[t] - s.iota_j[t]) + noise_sd * rng.normal();
  }
  return s;
}

Ar1RegressionSample simulate_ar1_regression(std::size_t n, double a, double b, double rho_x, double rho_u, Rng& rng,
                                            double noise_sd) {
  Ar1RegressionSample s;
  s.y.resize(n);
  s.x.resize(n);
  double x = rng.normal() / std::sqrt(1.0 - rho_x * rho_x);
  double u = noise_sd * rng.normal() / std::sqrt(1.0 - rho_u * rho_u);
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) {
      x = rho_x * x + rng.normal();
      u = rho_u * u + noise_sd * rng.normal();
    }
    s.x[t] = x;
    s.y[t] = a + b * x + u;
  }
  return s;
}

VecmSpec reference_vecm_spec(double sd) {
  VecmSpec spec;
  spec.beta.resize(3, 2);
  spec.beta << 1.0, 0.0, 0.0, 1.0, -1.151, -0.991;
  spec.alpha.resize(3, 2);
  spec.alpha << 0.0, 0.0, 0.38, -0.533, 0.28, -0.0387;
  spec.rho.resize(2);
  spec.rho << 0.0296, 0.0051;
  spec.sigma = Eigen::MatrixXd::Constant(3, 3, 0.3 * sd * sd);
  spec.sigma.diagonal().setConstant(sd * sd);
  return spec;
}

Eigen::MatrixXd simulate_vecm(const VecmSpec& spec, std::size_t n, Rng& rng, std::size_t burn, double start) {
  const auto k = spec.alpha.rows();
  const std::size_t p1 = spec.gamma.size();
  const std::size_t total = n + burn;
  const Eigen::MatrixXd e = gaussian_noise(spec.sigma, total, rng);

  // Attractor point: last coordinate at `start`, the others solving beta' y + rho = 0
  // (beta normalized with an identity top block).
  Eigen::VectorXd y0 = Eigen::VectorXd::Constant(k, start);
  const auto r = spec.beta.cols();
  if (r > 0 && r < k) {
    const Eigen::MatrixXd top = spec.beta.topRows(r);
    const Eigen::VectorXd rhs = -spec.rho - spec.beta.bottomRows(k - r).transpose() * y0.tail(k - r);
    y0.head(r) = top.transpose().fullPivLu().solve(rhs);
  }

  Eigen::MatrixXd y(static_cast<Eigen::Index>(total) + 1, k);
  y.row(0) = y0.transpose();
  std::vector<Eigen::VectorXd> dy_hist(p1, Eigen::VectorXd::Zero(k));
  for (std::size_t t = 1; t <= total; ++t) {
    const Eigen::VectorXd prev = y.row(static_cast<Eigen::Index>(t - 1)).transpose();
    Eigen::VectorXd dy = e.row(static_cast<Eigen::Index>(t - 1)).transpose();
    if (r > 0) dy += spec.alpha * (spec.beta.transpose() * prev + spec.rho);
    for (std::size_t i = 0; i < p1; ++i) dy += spec.gamma[i] * dy_hist[i];
    if (p1 > 0) {
      for (std::size_t i = p1 - 1; i > 0; --i) dy_hist[i] = dy_hist[i - 1];
      dy_hist[0] = dy;
    }
    y.row(static_cast<Eigen::Index>(t)) = (prev + dy).transpose();
  }
  return y.bottomRows(static_cast<Eigen::Index>(n));
}

Eigen::MatrixXd simulate_var(const std::vector<Eigen::MatrixXd>& a, const Eigen::VectorXd& c,
                             const Eigen::MatrixXd& sigma, std::size_t n, Rng& rng, std::size_t burn) {
  const auto k = sigma.rows();
  const std::size_t p = a.size();
  const std::size_t total = n + burn + p;
  const Eigen::MatrixXd e = gaussian_noise(sigma, total, rng);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(total), k);
  for (std::size_t t = p; t < total; ++t) {
    Eigen::VectorXd v = c + e.row(static_cast<Eigen::Index>(t)).transpose();
    for (std::size_t i = 0; i < p; ++i) v += a[i] * y.row(static_cast<Eigen::Index>(t - i - 1)).transpose();
    y.row(static_cast<Eigen::Index>(t)) = v.transpose();
  }
  return y.bottomRows(static_cast<Eigen::Index>(n));
}

}  // namespace plf::econ
