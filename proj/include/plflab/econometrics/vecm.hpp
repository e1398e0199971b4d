#pragma once

// Johansen reduced-rank estimation of
//   dy_t = alpha (beta' y_{t-1} + rho) + sum_{i=1}^{p-1} Gamma_i dy_{t-i} + e_t
// with the constant restricted to the cointegrating relations, so
// nu = alpha rho. Panels are T x K matrices, one column per series.

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace plf::econ {

struct CriticalValues {
  double p10 = 0.0;
  double p05 = 0.0;
  double p01 = 0.0;
};

/// Trace-test critical values, restricted constant, for K - r in 1..6.
CriticalValues trace_critical_values(int k_minus_r);

struct JohansenResult {
  int k = 0;
  int lags = 0;
  std::size_t n_eff = 0;
  std::vector<double> eigenvalues;   // descending, K entries
  std::vector<double> trace_stats;   // H(r) for r = 0..K-1
  std::vector<CriticalValues> critical;
  int rank = 0;
  Eigen::MatrixXd eigenvectors;  // (K+1) x K, columns in eigenvalue order, v' S11 v = 1
};

/// Throws InsufficientObservations unless T > K p + 10, InvalidParameter for
/// K outside 2..6 or p < 1, NumericalFailure if the eigenproblem breaks down.
JohansenResult johansen(const Eigen::MatrixXd& panel, int lags);

struct VecmFit {
  int k = 0;
  int rank = 0;
  int lags = 0;  // p, the level-VAR order
  std::size_t n_eff = 0;
  Eigen::VectorXd nu;
  Eigen::MatrixXd alpha;  // K x r
  Eigen::MatrixXd beta;   // K x r, top r x r block is the identity
  Eigen::VectorXd rho;    // r constants inside the relations
  std::vector<Eigen::MatrixXd> gamma;  // p - 1 matrices, K x K
  Eigen::MatrixXd residuals;  // n_eff x K
  Eigen::MatrixXd omega;      // e'e / n_eff
  Eigen::MatrixXd regressors; // n_eff x (r + K(p-1)), [beta~' z1, lagged differences]
  JohansenResult johansen;
  std::vector<std::string> warnings;
};

/// `rank` defaults to the trace-test selection. Throws RankOutOfRange.
VecmFit vecm_fit(const Eigen::MatrixXd& panel, std::optional<int> rank, int lags);

/// Level-VAR coefficient matrices A_1..A_p implied by the fit.
std::vector<Eigen::MatrixXd> level_var(const VecmFit& fit);

struct LagSelection {
  int aic = 1;
  int bic = 1;
  std::vector<double> aic_values;  // index p - 1
  std::vector<double> bic_values;
};

/// Level VAR with intercept, p = 1..max_lags on a common sample.
LagSelection select_lag_order(const Eigen::MatrixXd& panel, int max_lags);

struct IrfResult {
  std::vector<Eigen::MatrixXd> responses;  // h = 0..H; (i, j): variable i to shock j
  Eigen::MatrixXd impact;                  // Cholesky factor of omega
};

/// Orthogonalized responses, Cholesky in panel column order. Throws
/// NonPsdCovariance and InvalidParameter for horizon < 1.
IrfResult irf(const VecmFit& fit, int horizon);

/// Granger-representation long-run multiplier
/// beta_perp (alpha_perp' Gamma beta_perp)^-1 alpha_perp', Gamma = I - sum Gamma_i.
Eigen::MatrixXd long_run_multiplier(const VecmFit& fit);
/// Limit of the orthogonalized responses: long_run_multiplier * chol(omega).
Eigen::MatrixXd long_run_response(const VecmFit& fit);

struct StabilityReport {
  std::vector<std::complex<double>> roots;  // companion eigenvalues, by descending modulus
  std::vector<double> moduli;
  int expected_unit_roots = 0;  // K - r
  int unit_roots = 0;           // |modulus - 1| <= unit_tol
  int near_unit_roots = 0;      // other roots with modulus > 1 - tol
  int explosive_roots = 0;      // modulus > 1 + unit_tol
  bool flagged = false;
};

StabilityReport stability_check(const VecmFit& fit, double tol = 0.05, double unit_tol = 1e-6);

struct LjungBox {
  double q = 0.0;
  int df = 0;
  double p_value = 1.0;
};

struct JarqueBera {
  double stat = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
  double p_value = 1.0;
};

LjungBox ljung_box(const Eigen::VectorXd& x, int lags);
JarqueBera jarque_bera(const Eigen::VectorXd& x);

}  // namespace plf::econ
