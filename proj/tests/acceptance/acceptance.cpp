// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "plflab/analytics.hpp"
#include "plflab/econometrics/regression.hpp"
#include "plflab/econometrics/synthetic.hpp"
#include "plflab/econometrics/vecm.hpp"
#include "plflab/io.hpp"
#include "plflab/market_engine.hpp"
#include "plflab/rate_models.hpp"
#include "plflab/rng.hpp"
#include "plflab/simulator.hpp"

namespace fs = std::filesystem;
using namespace plf;
using namespace plf::econ;

namespace {

const fs::path kData = fs::path(PLFLAB_SOURCE_DIR) / "data";

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct OracleRow {
  int row;
  const char* u;
  const char* num;
  const char* den;
};

constexpr OracleRow kOracle[] = {
#include "cdai_schedule_oracle.inc"
};

Int128 parse_i128(const char* s) { return FixedDec::parse_mantissa(s).mantissa(); }

Outcome rate_fidelity() {
  const auto schedule = io::load_model_file(kData / "cdai_schedule.json");
  int checked = 0;
  int bad = 0;
  for (const auto& o : kOracle) {
    const RateModel& model = schedule.at(o.row).model;
    const Int128 got = borrow_rate(model, FixedDec::from_mantissa(parse_i128(o.u))).mantissa();
    const Int128 num = parse_i128(o.num);
    const Int128 den = parse_i128(o.den);
    const Int128 gap = got * den - num;
    if (gap > den || gap < -den) ++bad;
    ++checked;
  }
  int discontinuous = 0;
  for (const auto& sm : schedule) {
    const auto& k = std::get<KinkedModel>(sm.model);
    const FixedDec left = k.alpha + mul(k.beta, k.u_star);
    const FixedDec right = k.alpha + mul(k.beta, k.u_star) + mul(k.gamma, k.u_star - k.u_star);
    if (borrow_rate(k, k.u_star) != left || left != right) ++discontinuous;
  }
  const bool rows_ok = schedule.size() == 10 && checked == 50;
  return {rows_ok && bad == 0 && discontinuous == 0,
          fmt("%zu rows, %d points, %d outside 1e-18, %d discontinuities", schedule.size(), checked, bad,
              discontinuous)};
}

Outcome ceiling() {
  const NonLinearModel nl = default_nonlinear();
  const auto shipped = io::load_model_file(kData / "models/dydx_default.json");
  const auto& file = std::get<NonLinearModel>(shipped.front().model);
  bool ok = true;
  double worst = 0.0;
  for (const NonLinearModel& m : {nl, file}) {
    const FixedDec top = borrow_rate(m, FixedDec::one());
    ok = ok && top == m.alpha + m.beta + m.gamma;
    worst = std::max(worst, std::abs(annualize(top).to_double() - 0.5));
  }
  return {ok && worst <= 1e-12, fmt("rate(1) = alpha+beta+gamma, |annual - 0.5| = %.3g", worst)};
}

struct EngineRun {
  std::vector<int> codes;  // -1 for accepted events, else the rejection code
  std::optional<MarketState> state;
  bool conserved = true;
  bool monotone = true;
};

MarketState fresh_market(bool hot) {
  LiquidationParams liq;
  if (hot) return MarketState(LinearModel{FixedDec::parse("0.00001"), FixedDec::parse("0.0001")},
                              FixedDec::parse("0.2"), CeilingPolicy::Capped, liq);
  KinkedModel k{FixedDec::from_mantissa(38532925389), FixedDec::from_mantissa(264248265),
                FixedDec::from_mantissa(570776255707), FixedDec::parse("0.9"), FixedDec::parse("0.1")};
  return MarketState(k, FixedDec::zero(), CeilingPolicy::Capped, liq);
}

std::vector<Event> random_events(Rng& rng, int count) {
  static const char* kSuppliers[] = {"s1", "s2", "s3"};
  static const char* kBorrowers[] = {"b1", "b2", "b3"};
  auto amount = [&](std::int64_t max_units) {
    return FixedDec::from_mantissa(static_cast<Int128>(rng.next_u64() % (static_cast<std::uint64_t>(max_units) * 1000000)) *
                                   1000000000000LL);
  };
  std::vector<Event> out;
  std::int64_t block = 0;
  out.push_back({0, Action::Mint, "anchor", FixedDec::from_int(100)});
  for (int i = 0; i < count; ++i) {
    block += static_cast<std::int64_t>(rng.next_u64() % 2000);
    const char* s = kSuppliers[rng.next_u64() % 3];
    const char* b = kBorrowers[rng.next_u64() % 3];
    switch (rng.next_u64() % 9) {
      case 0:
      case 1: out.push_back({block, Action::Mint, s, amount(500)}); break;
      case 2: out.push_back({block, Action::Redeem, s, amount(400)}); break;
      case 3: out.push_back({block, Action::PostCollateral, b, amount(800)}); break;
      case 4:
      case 5: out.push_back({block, Action::Borrow, b, amount(300)}); break;
      case 6: out.push_back({block, Action::Repay, b, amount(200)}); break;
      case 7: out.push_back({block, Action::SetPrice, "", FixedDec::from_mantissa(static_cast<Int128>(rng.next_u64() % 1500 + 100) * 1000000000000000LL)}); break;
      case 8: out.push_back({block, Action::Liquidate, b, amount(60)}); break;
    }
  }
  return out;
}

EngineRun replay(const std::vector<Event>& events, bool hot) {
  EngineRun run;
  MarketState s = fresh_market(hot);
  FixedDec rate = s.exchange_rate();
  for (const Event& e : events) {
    try {
      apply_event(s, e);
      run.codes.push_back(-1);
    } catch (const Error& err) {
      run.codes.push_back(static_cast<int>(err.code()));
    }
    try {
      s.check_invariants();
    } catch (const std::logic_error&) {
      run.conserved = false;
    }
    if (s.cash().is_negative() || s.total_loans() > s.gross_deposits()) run.conserved = false;
    const FixedDec now = s.exchange_rate();
    if (now < rate) run.monotone = false;
    rate = now;
  }
  run.state = s;
  return run;
}

Outcome engine_properties() {
  const int kSequences = 10000;
  int broken = 0;
  int decreasing = 0;
  int diverged = 0;
  long accepted = 0;
  long rejected = 0;
  for (int i = 0; i < kSequences; ++i) {
    Rng rng(derive_seed(2024, static_cast<std::uint64_t>(i)));
    const bool hot = i % 2 == 0;
    const auto events = random_events(rng, 60);
    const EngineRun a = replay(events, hot);
    const EngineRun b = replay(events, hot);
    if (!a.conserved) ++broken;
    if (!a.monotone) ++decreasing;
    if (a.codes != b.codes || !(*a.state == *b.state)) ++diverged;
    for (int c : a.codes) (c < 0 ? accepted : rejected)++;
  }
  return {broken == 0 && decreasing == 0 && diverged == 0,
          fmt("%d sequences (%ld events applied, %ld rejected): %d conservation, %d exchange-rate, %d replay failures",
              kSequences, accepted, rejected, broken, decreasing, diverged)};
}

Outcome kink_clustering() {
  const Scenario s = io::load_scenario(kData / "scenarios/reference_kink.json");
  const SimOutput out = run(s);
  const auto u = out.utilization_path();
  const double mode = out.summary.utilization.mode_bin_center;
  const double mass = fraction_within(u, 0.85, 0.95);
  return {std::abs(mode - 0.9) <= 0.05 && mass > 0.4, fmt("mode %.3f, mass in [0.85, 0.95] %.3f", mode, mass)};
}

Outcome kink_placement() {
  const Scenario s = io::load_scenario(kData / "scenarios/reference_kink.json");
  const std::vector<FixedDec> kinks{FixedDec::parse("0.9"), FixedDec::parse("0.8")};
  const auto rows = kink_placement_experiment(s, kinks);
  const double mode = rows[1].utilization.mode_bin_center;
  const double above_hi = rows[0].utilization.fraction_above_095;
  const double above_lo = rows[1].utilization.fraction_above_095;
  return {std::abs(mode - 0.8) <= 0.05 && above_lo < above_hi,
          fmt("U*=0.8 mode %.3f; fraction U>0.95: %.4f at 0.9 vs %.4f at 0.8", mode, above_hi, above_lo)};
}

Outcome uip_recovery() {
  const auto size = monte_carlo(500, 11, [](std::size_t, Rng& r) {
    const auto s = simulate_uip(400, 0.0, 1.0, r);
    return uip_regress(s.exchange, s.iota_i, s.iota_j).p_strict < 0.05;
  });
  const auto power = monte_carlo(500, 12, [](std::size_t, Rng& r) {
    const auto s = simulate_uip(400, 0.0, 0.5, r);
    return uip_regress(s.exchange, s.iota_i, s.iota_j).p_weak < 0.05;
  });
  const double rej = std::count(size.begin(), size.end(), true) / 500.0;
  const double pw = std::count(power.begin(), power.end(), true) / 500.0;
  return {rej >= 0.02 && rej <= 0.10 && pw >= 0.95, fmt("strict-null rejection %.3f, weak-form power %.3f", rej, pw)};
}

Outcome hac() {
  Rng rng(77);
  const std::size_t n = 1000;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (std::size_t t = 0; t < n; ++t) {
    x(t, 0) = 1.0;
    x(t, 1) = rng.normal();
    y(t) = 0.5 + 1.5 * x(t, 1) + rng.normal();
  }
  const OlsFit fit = ols(x, y);
  const Eigen::VectorXd nw = newey_west(x, fit.residuals, 0).diagonal().cwiseSqrt();
  const Eigen::VectorXd wh = white_cov(x, fit.residuals).diagonal().cwiseSqrt();
  const double gap = (nw - wh).cwiseAbs().maxCoeff();

  const auto res = monte_carlo(2000, 13, [](std::size_t, Rng& r) {
    const auto s = simulate_ar1_regression(500, 0.0, 1.0, 0.5, 0.5, r);
    const auto fit = regress_with_hac(s.y, s.x, 8);
    return std::pair<double, double>(fit.beta_hat, fit.se_beta);
  });
  double mean = 0.0;
  double se = 0.0;
  for (const auto& [b, s] : res) {
    mean += b;
    se += s;
  }
  mean /= static_cast<double>(res.size());
  se /= static_cast<double>(res.size());
  double ss = 0.0;
  for (const auto& [b, s] : res) ss += (b - mean) * (b - mean);
  const double sd = std::sqrt(ss / static_cast<double>(res.size() - 1));
  const double ratio = se / sd;
  return {gap <= 1e-10 && ratio >= 0.8 && ratio <= 1.2,
          fmt("lags 0 vs White max SE gap %.2g; AR(1) mean HAC SE / MC SD %.3f", gap, ratio)};
}

Outcome vecm_recovery() {
  const VecmSpec spec = reference_vecm_spec();
  const auto runs = monte_carlo(100, 14, [&](std::size_t, Rng& r) {
    const VecmFit f = vecm_fit(simulate_vecm(spec, 2000, r), std::nullopt, 5);
    bool recovered = false;
    if (f.rank == 2) {
      recovered = std::abs(f.beta(2, 0) - spec.beta(2, 0)) <= 0.1;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 2; ++j) recovered = recovered && std::abs(f.alpha(i, j) - spec.alpha(i, j)) <= 0.1;
      }
    }
    return std::pair<bool, bool>(f.rank == 2, recovered);
  });
  int rank2 = 0;
  int recovered = 0;
  for (const auto& [r, ok] : runs) {
    rank2 += r;
    recovered += ok;
  }
  return {rank2 >= 90 && recovered >= 90, fmt("rank 2 in %d/100 seeds, beta and alpha recovered in %d/100", rank2, recovered)};
}

Outcome irf_structure() {
  Rng rng(5);
  const VecmFit fit = vecm_fit(simulate_vecm(reference_vecm_spec(), 2000, rng), 2, 5);
  const IrfResult r = irf(fit, 200);
  const Eigen::VectorXd limit = long_run_response(fit).col(0);
  const Eigen::VectorXd at = r.responses[200].col(0);
  const double rel = (at - limit).cwiseAbs().maxCoeff() / limit.cwiseAbs().maxCoeff();
  const bool nonzero = limit.cwiseAbs().minCoeff() > 1e-4;

  Rng srng(6);
  const Eigen::MatrixXd a = Eigen::Vector3d(0.6, 0.4, 0.2).asDiagonal();
  const Eigen::MatrixXd y = simulate_var({a}, Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3) * 1e-4, 2000, srng);
  const IrfResult st = irf(vecm_fit(y, 3, 1), 200);
  const double tail = st.responses[200].cwiseAbs().maxCoeff();
  return {rel <= 0.01 && nonzero && tail < 1e-6,
          fmt("driving-shock responses at h=200 within %.2g of the long-run limit; stationary tail %.2g", rel, tail)};
}

Outcome stability() {
  const VecmSpec spec = reference_vecm_spec();
  const auto reports = monte_carlo(20, 15, [&](std::size_t, Rng& r) {
    return stability_check(vecm_fit(simulate_vecm(spec, 2000, r), 2, 5));
  });
  int exact = 0;
  int explosive = 0;
  for (const auto& rep : reports) {
    exact += rep.unit_roots == rep.expected_unit_roots && rep.expected_unit_roots == 1;
    explosive += rep.explosive_roots;
  }
  Rng srng(16);
  const Eigen::MatrixXd a = Eigen::Vector3d(0.5, 0.3, 0.2).asDiagonal();
  const Eigen::MatrixXd y = simulate_var({a}, Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3), 2000, srng);
  const StabilityReport full = stability_check(vecm_fit(y, 3, 2));
  const bool stationary_ok = full.unit_roots == 0 && full.explosive_roots == 0;
  return {exact == 20 && explosive == 0 && stationary_ok,
          fmt("%d/20 fits with exactly K-r = 1 unit root, %d explosive roots; K=r fit has %d unit roots", exact,
              explosive, full.unit_roots)};
}

std::vector<analytics::Band> brute_bands(const std::vector<double>& u, const std::vector<double>& t) {
  std::vector<analytics::Band> out;
  auto band = [&](double x) {
    int b = -1;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (x >= t[i]) b = static_cast<int>(i);
    }
    return b;
  };
  for (std::size_t i = 0; i < u.size(); ++i) {
    const int b = band(u[i]);
    if (b < 0) continue;
    if (!out.empty() && out.back().end == i && static_cast<int>(out.back().band) == b) {
      out.back().end = i + 1;
    } else {
      out.push_back({static_cast<std::size_t>(b), i, i + 1});
    }
  }
  return out;
}

std::vector<double> brute_curve(std::vector<double> b) {
  std::vector<double> sorted;
  while (!b.empty()) {
    auto it = std::max_element(b.begin(), b.end());
    sorted.push_back(*it);
    b.erase(it);
  }
  double total = 0.0;
  for (double x : sorted) total += x;
  std::vector<double> curve;
  for (std::size_t k = 1; k <= sorted.size(); ++k) {
    double top = 0.0;
    for (std::size_t i = 0; i < k; ++i) top += sorted[i];
    curve.push_back(k == sorted.size() ? 1.0 : std::min(1.0, top / total));
  }
  return curve;
}

Outcome analytics_exactness() {
  Rng rng(99);
  const std::vector<double> grid{0.0, 0.5, 0.79, 0.8, 0.85, 0.9, 0.95, 0.99, 1.0, 1.05, 1.3};
  const std::vector<double> defaults{0.8, 0.9, 1.0};
  int band_mismatch = 0;
  int curve_mismatch = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.next_u64() % 200;
    std::vector<double> u(n);
    for (double& x : u) x = rng.uniform() < 0.5 ? grid[rng.next_u64() % grid.size()] : 1.2 * rng.uniform();
    std::vector<double> thresholds = defaults;
    if (trial % 3 == 1) thresholds = {0.5, 0.75, 0.95, 1.1};
    if (analytics::illiquidity_bands(u, thresholds) != brute_bands(u, thresholds)) ++band_mismatch;

    std::vector<double> bal(1 + rng.next_u64() % 100);
    for (double& x : bal) x = trial % 2 ? std::floor(rng.uniform() * 1000) : std::exp(8 * rng.normal());
    bal[0] += 1.0;
    if (analytics::concentration(bal).curve != brute_curve(bal)) ++curve_mismatch;
  }
  return {band_mismatch == 0 && curve_mismatch == 0,
          fmt("1000 inputs: %d band and %d concentration mismatches", band_mismatch, curve_mismatch)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "rate-model fidelity", 1.0, rate_fidelity},
      {2, "non-linear ceiling", 0.0, ceiling},
      {3, "engine conservation and determinism", 30.0, engine_properties},
      {4, "kink clustering", 20.0, kink_clustering},
      {5, "kink placement", 40.0, kink_placement},
      {6, "UIP estimator recovery", 60.0, uip_recovery},
      {7, "HAC correctness", 0.0, hac},
      {8, "VECM recovery", 120.0, vecm_recovery},
      {9, "IRF structure", 0.0, irf_structure},
      {10, "stability diagnostic", 0.0, stability},
      {11, "analytics exactness", 0.0, analytics_exactness},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt("%.2fs", secs);
    if (c.budget_s > 0.0) {
      timing += fmt(" of %.0fs budget", c.budget_s);
      if (secs >= c.budget_s) o.pass = false;
    }
    std::printf("criterion %2d %s: %s (%s; %s)\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
