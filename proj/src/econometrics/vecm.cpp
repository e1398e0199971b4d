#include "plflab/econometrics/vecm.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "plflab/econometrics/regression.hpp"
#include "plflab/error.hpp"

namespace plf::econ {

namespace {

// Osterwald-Lenum (1992), trace statistic, constant restricted to the
// cointegrating space; rows indexed by K - r.
constexpr std::array<CriticalValues, 6> kTraceTable{{
    {7.52, 9.24, 12.97},
    {17.85, 19.96, 24.60},
    {32.00, 34.91, 41.07},
    {49.65, 53.12, 60.16},
    {71.86, 76.07, 84.45},
    {97.18, 102.14, 111.01},
}};

struct Blocks {
  Eigen::MatrixXd z0;  // dy_t
  Eigen::MatrixXd z1;  // [y_{t-1}, 1]
  Eigen::MatrixXd z2;  // dy_{t-1} .. dy_{t-p+1}
};

Blocks build_blocks(const Eigen::MatrixXd& y, int p) {
  const Eigen::Index k = y.cols();
  const Eigen::Index n = y.rows() - p;
  Blocks b;
  b.z0.resize(n, k);
  b.z1.resize(n, k + 1);
  b.z2.resize(n, k * (p - 1));
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::Index s = t + p;
    b.z0.row(t) = y.row(s) - y.row(s - 1);
    b.z1.row(t).head(k) = y.row(s - 1);
    b.z1(t, k) = 1.0;
    for (int i = 1; i < p; ++i) b.z2.row(t).segment(k * (i - 1), k) = y.row(s - i) - y.row(s - i - 1);
  }
  return b;
}

Eigen::MatrixXd partial_out(const Eigen::MatrixXd& m, const Eigen::MatrixXd& z2) {
  if (z2.cols() == 0) return m;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z2);
  if (qr.rank() < z2.cols()) throw Error(ErrorCode::NumericalFailure, "lagged differences are collinear");
  return m - z2 * qr.solve(m);
}

Eigen::MatrixXd orthogonal_complement(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU);
  return svd.matrixU().rightCols(m.rows() - m.cols());
}

void check_panel(const Eigen::MatrixXd& panel, int lags) {
  const auto k = panel.cols();
  if (k < 2 || k > 6) throw Error(ErrorCode::InvalidParameter, "panel must have 2 to 6 series, got " + std::to_string(k));
  if (lags < 1) throw Error(ErrorCode::InvalidParameter, "lags must be >= 1");
  if (panel.rows() <= k * lags + 10) {
    throw Error(ErrorCode::InsufficientObservations, "need more than K*p + 10 = " + std::to_string(k * lags + 10) +
                                                         " observations, got " + std::to_string(panel.rows()));
  }
  if (!panel.allFinite()) throw Error(ErrorCode::InvalidParameter, "panel contains non-finite values");
}

}  // namespace

CriticalValues trace_critical_values(int k_minus_r) {
  if (k_minus_r < 1 || k_minus_r > 6) throw Error(ErrorCode::InvalidParameter, "K - r must lie in 1..6");
  return kTraceTable[static_cast<std::size_t>(k_minus_r - 1)];
}

JohansenResult johansen(const Eigen::MatrixXd& panel, int lags) {
  check_panel(panel, lags);
  const int k = static_cast<int>(panel.cols());
  const Blocks b = build_blocks(panel, lags);
  const auto n = static_cast<double>(b.z0.rows());

  const Eigen::MatrixXd r0 = partial_out(b.z0, b.z2);
  const Eigen::MatrixXd r1 = partial_out(b.z1, b.z2);
  const Eigen::MatrixXd s00 = r0.transpose() * r0 / n;
  const Eigen::MatrixXd s01 = r0.transpose() * r1 / n;
  const Eigen::MatrixXd s11 = r1.transpose() * r1 / n;

  Eigen::LLT<Eigen::MatrixXd> l11(s11);
  Eigen::LLT<Eigen::MatrixXd> l00(s00);
  if (l11.info() != Eigen::Success || l00.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure, "moment matrices are not positive definite");
  }
  const Eigen::MatrixXd l = l11.matrixL();
  // C = L^-1 S10 S00^-1 S01 L^-T
  const Eigen::MatrixXd w = l.triangularView<Eigen::Lower>().solve(s01.transpose());
  Eigen::MatrixXd c = w * l00.solve(w.transpose());
  c = 0.5 * (c + c.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::NumericalFailure, "eigen-solver did not converge");

  JohansenResult res;
  res.k = k;
  res.lags = lags;
  res.n_eff = static_cast<std::size_t>(b.z0.rows());
  const Eigen::Index m = c.rows();
  res.eigenvectors.resize(k + 1, k);
  for (int i = 0; i < k; ++i) {
    double lambda = es.eigenvalues()(m - 1 - i);
    if (lambda >= 1.0 || !std::isfinite(lambda)) throw Error(ErrorCode::NumericalFailure, "eigenvalue outside [0, 1)");
    lambda = std::max(lambda, 0.0);
    res.eigenvalues.push_back(lambda);
    res.eigenvectors.col(i) = l.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors().col(m - 1 - i));
  }
  res.rank = k;
  bool selected = false;
  for (int r = 0; r < k; ++r) {
    double stat = 0.0;
    for (int i = r; i < k; ++i) stat -= n * std::log1p(-res.eigenvalues[static_cast<std::size_t>(i)]);
    res.trace_stats.push_back(stat);
    res.critical.push_back(trace_critical_values(k - r));
    if (!selected && stat < res.critical.back().p05) {
      res.rank = r;
      selected = true;
    }
  }
  return res;
}

VecmFit vecm_fit(const Eigen::MatrixXd& panel, std::optional<int> rank, int lags) {
  check_panel(panel, lags);
  const int k = static_cast<int>(panel.cols());
  if (rank && (*rank < 0 || *rank > k)) {
    throw Error(ErrorCode::RankOutOfRange, "rank " + std::to_string(*rank) + " outside [0, " + std::to_string(k) + "]");
  }
  VecmFit fit;
  fit.johansen = johansen(panel, lags);
  fit.k = k;
  fit.lags = lags;
  fit.rank = rank.value_or(fit.johansen.rank);
  const int r = fit.rank;
  if (rank && *rank != fit.johansen.rank) {
    fit.warnings.push_back("rank " + std::to_string(*rank) + " differs from the trace-test rank " +
                           std::to_string(fit.johansen.rank));
  }
  const Blocks b = build_blocks(panel, lags);
  fit.n_eff = static_cast<std::size_t>(b.z0.rows());

  Eigen::MatrixXd beta_ext(k + 1, r);
  if (r > 0) {
    const Eigen::MatrixXd raw = fit.johansen.eigenvectors.leftCols(r);
    Eigen::FullPivLU<Eigen::MatrixXd> top(raw.topRows(r));
    if (!top.isInvertible()) throw Error(ErrorCode::NumericalFailure, "cannot normalize cointegrating vectors");
    beta_ext = raw * top.inverse();
    beta_ext.topRows(r).setIdentity();
  }
  fit.beta = beta_ext.topRows(k);
  fit.rho = r > 0 ? Eigen::VectorXd(beta_ext.row(k).transpose()) : Eigen::VectorXd(0);

  const Eigen::Index nreg = r + b.z2.cols();
  fit.regressors.resize(b.z0.rows(), nreg);
  if (r > 0) fit.regressors.leftCols(r) = b.z1 * beta_ext;
  if (b.z2.cols() > 0) fit.regressors.rightCols(b.z2.cols()) = b.z2;

  Eigen::MatrixXd coef(nreg, k);
  if (nreg > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(fit.regressors);
    if (qr.rank() < nreg) throw Error(ErrorCode::NumericalFailure, "VECM regressors are collinear");
    coef = qr.solve(b.z0);
    fit.residuals = b.z0 - fit.regressors * coef;
  } else {
    fit.residuals = b.z0;
  }
  fit.alpha = coef.topRows(r).transpose();
  for (int i = 1; i < lags; ++i) fit.gamma.push_back(coef.block(r + k * (i - 1), 0, k, k).transpose());
  fit.nu = r > 0 ? Eigen::VectorXd(fit.alpha * fit.rho) : Eigen::VectorXd::Zero(k);
  fit.omega = fit.residuals.transpose() * fit.residuals / static_cast<double>(fit.n_eff);
  return fit;
}

std::vector<Eigen::MatrixXd> level_var(const VecmFit& fit) {
  const int k = fit.k;
  const int p = fit.lags;
  const Eigen::MatrixXd pi = fit.rank > 0 ? Eigen::MatrixXd(fit.alpha * fit.beta.transpose())
                                          : Eigen::MatrixXd(Eigen::MatrixXd::Zero(k, k));
  std::vector<Eigen::MatrixXd> a(static_cast<std::size_t>(p));
  a[0] = Eigen::MatrixXd::Identity(k, k) + pi;
  if (p > 1) a[0] += fit.gamma[0];
  for (int i = 2; i < p; ++i) {
    a[static_cast<std::size_t>(i - 1)] = fit.gamma[static_cast<std::size_t>(i - 1)] - fit.gamma[static_cast<std::size_t>(i - 2)];
  }
  if (p > 1) a[static_cast<std::size_t>(p - 1)] = -fit.gamma[static_cast<std::size_t>(p - 2)];
  return a;
}

LagSelection select_lag_order(const Eigen::MatrixXd& panel, int max_lags) {
  const auto k = panel.cols();
  if (max_lags < 1) throw Error(ErrorCode::InvalidParameter, "max_lags must be >= 1");
  const Eigen::Index n = panel.rows() - max_lags;
  if (n <= k * max_lags + 1 + 10) throw Error(ErrorCode::InsufficientObservations, "too few observations for lag search");
  LagSelection sel;
  double best_aic = std::numeric_limits<double>::infinity();
  double best_bic = std::numeric_limits<double>::infinity();
  for (int p = 1; p <= max_lags; ++p) {
    Eigen::MatrixXd x(n, 1 + k * p);
    Eigen::MatrixXd y = panel.bottomRows(n);
    for (Eigen::Index t = 0; t < n; ++t) {
      const Eigen::Index s = t + max_lags;
      x(t, 0) = 1.0;
      for (int i = 1; i <= p; ++i) x.row(t).segment(1 + k * (i - 1), k) = panel.row(s - i);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < x.cols()) throw Error(ErrorCode::NumericalFailure, "lag-search design is collinear");
    const Eigen::MatrixXd e = y - x * qr.solve(y);
    const Eigen::MatrixXd sigma = e.transpose() * e / static_cast<double>(n);
    const double logdet = 2.0 * Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double params = static_cast<double>(p * k * k);
    const double aic = logdet + 2.0 * params / static_cast<double>(n);
    const double bic = logdet + std::log(static_cast<double>(n)) * params / static_cast<double>(n);
    sel.aic_values.push_back(aic);
    sel.bic_values.push_back(bic);
    if (aic < best_aic) {
      best_aic = aic;
      sel.aic = p;
    }
    if (bic < best_bic) {
      best_bic = bic;
      sel.bic = p;
    }
  }
  return sel;
}

IrfResult irf(const VecmFit& fit, int horizon) {
  if (horizon < 1) throw Error(ErrorCode::InvalidParameter, "horizon must be >= 1");
  Eigen::LLT<Eigen::MatrixXd> llt(fit.omega);
  if (llt.info() != Eigen::Success || !fit.omega.allFinite()) {
    throw Error(ErrorCode::NonPsdCovariance, "residual covariance is not positive definite");
  }
  const auto a = level_var(fit);
  const int k = fit.k;
  IrfResult out;
  out.impact = llt.matrixL();
  std::vector<Eigen::MatrixXd> phi;
  phi.push_back(Eigen::MatrixXd::Identity(k, k));
  for (int h = 1; h <= horizon; ++h) {
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, k);
    for (int j = 1; j <= std::min<int>(h, static_cast<int>(a.size())); ++j) {
      next += a[static_cast<std::size_t>(j - 1)] * phi[static_cast<std::size_t>(h - j)];
    }
    phi.push_back(std::move(next));
  }
  for (const auto& m : phi) out.responses.push_back(m * out.impact);
  return out;
}

Eigen::MatrixXd long_run_multiplier(const VecmFit& fit) {
  const int k = fit.k;
  const int r = fit.rank;
  if (r == k) return Eigen::MatrixXd::Zero(k, k);
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Identity(k, k);
  for (const auto& g : fit.gamma) gamma -= g;
  const Eigen::MatrixXd a_perp = r > 0 ? orthogonal_complement(fit.alpha) : Eigen::MatrixXd(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd b_perp = r > 0 ? orthogonal_complement(fit.beta) : Eigen::MatrixXd(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd m = a_perp.transpose() * gamma * b_perp;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) throw Error(ErrorCode::NumericalFailure, "long-run multiplier is undefined (I(2) system)");
  return b_perp * lu.inverse() * a_perp.transpose();
}

Eigen::MatrixXd long_run_response(const VecmFit& fit) {
  Eigen::LLT<Eigen::MatrixXd> llt(fit.omega);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::NonPsdCovariance, "residual covariance is not positive definite");
  return long_run_multiplier(fit) * Eigen::MatrixXd(llt.matrixL());
}

StabilityReport stability_check(const VecmFit& fit, double tol, double unit_tol) {
  const auto a = level_var(fit);
  const int k = fit.k;
  const int p = static_cast<int>(a.size());
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(k * p, k * p);
  for (int i = 0; i < p; ++i) comp.block(0, k * i, k, k) = a[static_cast<std::size_t>(i)];
  if (p > 1) comp.block(k, 0, k * (p - 1), k * (p - 1)).setIdentity();
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);

  StabilityReport rep;
  rep.expected_unit_roots = k - fit.rank;
  if (es.info() != Eigen::Success) {
    rep.flagged = true;
    return rep;
  }
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) rep.roots.push_back(es.eigenvalues()(i));
  std::stable_sort(rep.roots.begin(), rep.roots.end(),
                   [](const auto& x, const auto& y) { return std::abs(x) > std::abs(y); });
  for (const auto& z : rep.roots) {
    const double m = std::abs(z);
    rep.moduli.push_back(m);
    if (std::fabs(m - 1.0) <= unit_tol) {
      ++rep.unit_roots;
    } else if (m > 1.0 + unit_tol) {
      ++rep.explosive_roots;
    } else if (m > 1.0 - tol) {
      ++rep.near_unit_roots;
    }
  }
  rep.flagged = rep.unit_roots != rep.expected_unit_roots || rep.near_unit_roots > 0 || rep.explosive_roots > 0;
  return rep;
}

LjungBox ljung_box(const Eigen::VectorXd& x, int lags) {
  const auto n = x.size();
  if (lags < 1 || lags >= n) throw Error(ErrorCode::InvalidParameter, "ljung-box lags must lie in [1, n)");
  const Eigen::VectorXd d = x.array() - x.mean();
  const double denom = d.squaredNorm();
  LjungBox lb;
  lb.df = lags;
  if (denom == 0.0) return lb;
  const double nn = static_cast<double>(n);
  for (int k = 1; k <= lags; ++k) {
    const double rho = d.tail(n - k).dot(d.head(n - k)) / denom;
    lb.q += rho * rho / (nn - k);
  }
  lb.q *= nn * (nn + 2.0);
  lb.p_value = chi2_sf(lb.q, lags);
  return lb;
}

JarqueBera jarque_bera(const Eigen::VectorXd& x) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 3) throw Error(ErrorCode::InsufficientObservations, "jarque-bera needs at least 3 observations");
  const Eigen::ArrayXd d = x.array() - x.mean();
  const double m2 = d.square().mean();
  JarqueBera jb;
  if (m2 == 0.0) return jb;
  jb.skewness = d.cube().mean() / std::pow(m2, 1.5);
  jb.kurtosis = d.square().square().mean() / (m2 * m2);
  jb.stat = n / 6.0 * (jb.skewness * jb.skewness + 0.25 * (jb.kurtosis - 3.0) * (jb.kurtosis - 3.0));
  jb.p_value = chi2_sf(jb.stat, 2);
  return jb;
}

}  // namespace plf::econ
