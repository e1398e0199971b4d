#include "plflab/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "plflab/analytics.hpp"
#include "plflab/econometrics/regression.hpp"
#include "plflab/econometrics/series.hpp"
#include "plflab/econometrics/vecm.hpp"
#include "plflab/error.hpp"
#include "plflab/io.hpp"
#include "plflab/simulator.hpp"

namespace plf::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError:
      return kExitIo;
    case ErrorCode::InsufficientObservations:
    case ErrorCode::DegenerateRegressor:
    case ErrorCode::SingularDesign:
    case ErrorCode::NumericalFailure:
    case ErrorCode::NonPsdCovariance:
    case ErrorCode::Overflow:
    case ErrorCode::DivisionByZero:
      return kExitNumerical;
    default:
      return kExitInput;
  }
}

[[noreturn]] void usage_error(const std::string& msg) { throw Error(ErrorCode::InvalidParameter, msg); }

std::string fmt(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string num(double v) { return io::format_double(v); }

// Existing paths are used as given; otherwise relative paths are looked up
// under PLFLAB_DATA_DIR.
fs::path resolve_input(const std::string& given) {
  const fs::path p(given);
  if (fs::exists(p)) return p;
  if (p.is_relative()) {
    if (const char* root = std::getenv("PLFLAB_DATA_DIR"); root != nullptr && *root != '\0') {
      const fs::path candidate = fs::path(root) / p;
      if (fs::exists(candidate)) return candidate;
    }
  }
  throw Error(ErrorCode::IoError, "input '" + given + "' not found (also searched PLFLAB_DATA_DIR)");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::IoError, "cannot create output directory '" + dir.string() + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string scenario;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool events = false;
  bool check_invariants = false;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  Scenario s = io::load_scenario(resolve_input(a.scenario));
  if (a.seed) s.rng_seed = *a.seed;
  RunOptions opts;
  opts.record_events = a.events;
  opts.check_invariants = a.check_invariants;
  const SimOutput result = run(s, opts);
  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  io::write_file(dir / "snapshot.csv", io::write_snapshots(result.series));
  io::write_file(dir / "summary.json", io::summary_json(s, result));
  if (a.events) io::write_file(dir / "events.csv", io::write_events(result.events));
  const auto& u = result.summary.utilization;
  out << "blocks " << result.series.size() << ", agents " << s.agents.size() << "\n"
      << "utilization mode " << fmt(u.mode_bin_center, 2) << ", median " << fmt(u.median, 4) << ", share above 0.95 "
      << fmt(u.fraction_above_095, 4) << "\n"
      << "liquidations " << result.summary.liquidations << "\n"
      << "wrote " << (dir / "snapshot.csv").string() << ", " << (dir / "summary.json").string()
      << (a.events ? ", " + (dir / "events.csv").string() : std::string()) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// rates

struct RatesArgs {
  std::string model;
  std::string grid = "0:1:0.01";
  bool per_block = false;
  std::int64_t blocks_per_year = kDefaultBlocksPerYear;
  std::optional<std::int64_t> at_block;
  std::string reserve_factor = "0";
};

std::vector<FixedDec> parse_grid(const std::string& spec) {
  std::vector<FixedDec> out;
  try {
    if (spec.find(':') != std::string::npos) {
      const auto parts = split(spec, ':');
      if (parts.size() != 3) usage_error("grid must be start:stop:step or a comma list");
      const FixedDec start = FixedDec::parse(parts[0]);
      const FixedDec stop = FixedDec::parse(parts[1]);
      const FixedDec step = FixedDec::parse(parts[2]);
      if (step <= FixedDec::zero()) usage_error("grid step must be > 0");
      if (stop < start) usage_error("grid stop must be >= start");
      for (FixedDec u = start; u <= stop; u = u + step) {
        out.push_back(u);
        if (out.size() > 1000000) usage_error("grid has more than 1e6 points");
      }
    } else {
      for (const auto& p : split(spec, ',')) out.push_back(FixedDec::parse(p));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) usage_error(std::string("bad grid: ") + e.message());
    throw;
  }
  if (out.empty()) usage_error("grid is empty");
  for (FixedDec u : out) {
    if (u.is_negative()) usage_error("utilization grid values must be >= 0");
  }
  return out;
}

int cmd_rates(const RatesArgs& a, std::ostream& out) {
  if (a.blocks_per_year <= 0) usage_error("--blocks-per-year must be > 0");
  const auto schedule = io::load_model_file(resolve_input(a.model));
  const ScheduledModel* active = &schedule.front();
  if (a.at_block) {
    for (const auto& m : schedule) {
      if (m.block <= *a.at_block) active = &m;
    }
  }
  const auto grid = parse_grid(a.grid);
  const FixedDec rf = FixedDec::parse(a.reserve_factor);
  out << "utilization,borrow_rate,supply_rate\n";
  for (FixedDec u : grid) {
    const FixedDec ib = borrow_rate(active->model, u);
    const FixedDec is = std::holds_alternative<AaveVariableModel>(active->model)
                            ? mul(u, mul(ib, FixedDec::one() - rf))
                            : saving_rate(active->model, u);
    const FixedDec b = a.per_block ? ib : annualize(ib, a.blocks_per_year);
    const FixedDec s = a.per_block ? is : annualize(is, a.blocks_per_year);
    out << u.to_string() << ',' << b.to_string() << ',' << s.to_string() << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// shared panel helpers

struct SeriesKey {
  std::string platform;
  std::string market;
  bool operator<(const SeriesKey& o) const { return std::tie(platform, market) < std::tie(o.platform, o.market); }
};

std::map<SeriesKey, std::vector<io::PanelRow>> group_panel(const std::vector<io::PanelRow>& rows) {
  std::map<SeriesKey, std::vector<io::PanelRow>> g;
  for (const auto& r : rows) g[{r.platform, r.market}].push_back(r);
  for (auto& [k, v] : g) std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.day < y.day; });
  return g;
}

econ::RateSeries resample_field(const std::vector<io::PanelRow>& rows, econ::Frequency f, econ::Aggregation agg,
                                double (*get)(const io::PanelRow&)) {
  std::vector<std::int64_t> days;
  std::vector<double> values;
  for (const auto& r : rows) {
    days.push_back(r.day);
    values.push_back(get(r));
  }
  return econ::resample(days, values, f, agg);
}

double borrow_of(const io::PanelRow& r) { return r.borrow_rate; }
double supply_of(const io::PanelRow& r) { return r.supply_rate; }
double price_of(const io::PanelRow& r) { return *r.price; }

bool parse_rate_kind(const std::string& kind) {
  if (kind == "borrow") return true;
  if (kind == "supply") return false;
  usage_error("--rate must be borrow|supply");
}

// ---------------------------------------------------------------------------
// uip

struct UipArgs {
  std::string panel;
  std::string pairs;
  std::string frequency = "daily";
  std::optional<int> hac_lags;
  std::string rate = "borrow";
  std::optional<std::string> out_dir;
};

struct Pair {
  std::string platform;
  std::string market_i;
  std::string market_j;
  std::string label() const { return platform + ":" + market_i + "/" + market_j; }
};

int cmd_uip(const UipArgs& a, std::ostream& out, std::ostream& err) {
  const econ::Frequency freq = econ::parse_frequency(a.frequency);
  const bool borrow = parse_rate_kind(a.rate);
  if (a.hac_lags && *a.hac_lags < 0) usage_error("--hac-lags must be >= 0");
  const auto rows = io::parse_panel(io::read_file(resolve_input(a.panel)));
  const auto groups = group_panel(rows);

  auto has_prices = [&](const SeriesKey& k) {
    const auto it = groups.find(k);
    return it != groups.end() &&
           std::all_of(it->second.begin(), it->second.end(), [](const io::PanelRow& r) { return r.price.has_value(); });
  };

  std::vector<Pair> pairs;
  if (!a.pairs.empty()) {
    for (const auto& spec : split(a.pairs, ',')) {
      const auto colon = spec.find(':');
      const auto slash = spec.find('/');
      if (colon == std::string::npos || slash == std::string::npos || slash < colon) {
        usage_error("pair '" + spec + "' must look like platform:MARKET_I/MARKET_J");
      }
      Pair p{spec.substr(0, colon), spec.substr(colon + 1, slash - colon - 1), spec.substr(slash + 1)};
      for (const auto& m : {p.market_i, p.market_j}) {
        if (!groups.count({p.platform, m})) usage_error("pair " + p.label() + ": no data for " + p.platform + "/" + m);
        if (!has_prices({p.platform, m})) usage_error("pair " + p.label() + ": " + m + " has no price column values");
      }
      if (p.market_i == p.market_j) usage_error("pair " + p.label() + " repeats a market");
      pairs.push_back(p);
    }
  } else {
    std::map<std::string, std::vector<std::string>> markets;
    for (const auto& [k, v] : groups) {
      if (has_prices(k)) markets[k.platform].push_back(k.market);
    }
    for (const auto& [platform, ms] : markets) {
      for (std::size_t i = 0; i < ms.size(); ++i) {
        for (std::size_t j = i + 1; j < ms.size(); ++j) pairs.push_back({platform, ms[i], ms[j]});
      }
    }
  }
  if (pairs.empty()) usage_error("no market pairs with prices in the panel (need two priced markets on one platform)");

  const double days_per_period = freq == econ::Frequency::Daily ? 1.0 : 7.0;
  std::vector<std::vector<std::string>> table;
  Json results = Json::array();
  for (const auto& p : pairs) {
    const auto& ri = groups.at({p.platform, p.market_i});
    const auto& rj = groups.at({p.platform, p.market_j});
    auto rate = borrow ? borrow_of : supply_of;
    const std::vector<econ::RateSeries> parts{
        resample_field(ri, freq, econ::Aggregation::Mean, rate), resample_field(rj, freq, econ::Aggregation::Mean, rate),
        resample_field(ri, freq, econ::Aggregation::First, price_of),
        resample_field(rj, freq, econ::Aggregation::First, price_of)};
    const auto aligned = econ::align(parts);
    std::vector<double> s;
    std::vector<double> ii;
    std::vector<double> ij;
    for (std::size_t t = 0; t < aligned[0].size(); ++t) {
      if (!(aligned[2].values[t] > 0.0)) usage_error("pair " + p.label() + ": prices must be > 0");
      s.push_back(aligned[3].values[t] / aligned[2].values[t]);
      ii.push_back(aligned[0].values[t] * days_per_period / 365.0);
      ij.push_back(aligned[1].values[t] * days_per_period / 365.0);
    }
    econ::RegressionResult r;
    try {
      r = econ::uip_regress(s, ii, ij, a.hac_lags);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InsufficientObservations || e.code() == ErrorCode::DegenerateRegressor) {
        err << "warning: skipping " << p.label() << ": " << e.message() << "\n";
        continue;
      }
      throw;
    }
    std::size_t partial = 0;
    for (bool b : aligned[0].partial) partial += b ? 1 : 0;
    table.push_back({p.label(), std::to_string(r.n_obs), num(r.alpha_hat), num(r.se_alpha), num(r.p_alpha),
                     num(r.beta_hat), num(r.se_beta), num(r.p_beta), num(r.r_squared), num(r.wald_strict),
                     num(r.p_strict), num(r.wald_weak), num(r.p_weak), std::to_string(r.hac_lags)});
    results.push_back({{"pair", p.label()},
                       {"frequency", std::string(econ::to_string(freq))},
                       {"rate", a.rate},
                       {"n_obs", r.n_obs},
                       {"alpha", r.alpha_hat},
                       {"beta", r.beta_hat},
                       {"se_alpha", r.se_alpha},
                       {"se_beta", r.se_beta},
                       {"p_alpha", r.p_alpha},
                       {"p_beta", r.p_beta},
                       {"r_squared", r.r_squared},
                       {"hac_cov", {{r.hac_cov(0, 0), r.hac_cov(0, 1)}, {r.hac_cov(1, 0), r.hac_cov(1, 1)}}},
                       {"hac_lags", r.hac_lags},
                       {"wald_strict", r.wald_strict},
                       {"p_strict", r.p_strict},
                       {"wald_weak", r.wald_weak},
                       {"p_weak", r.p_weak},
                       {"partial_periods", partial}});
  }
  if (table.empty()) throw Error(ErrorCode::InsufficientObservations, "no pair had enough observations");
  const std::vector<std::string> header{"pair",    "n_obs",  "alpha",     "se_alpha",    "p_alpha",
                                        "beta",    "se_beta", "p_beta",   "r_squared",   "wald_strict",
                                        "p_strict", "wald_weak", "p_weak", "hac_lags"};
  const std::string csv = io::to_csv(header, table);
  out << csv;
  if (a.out_dir) {
    const fs::path dir(*a.out_dir);
    ensure_dir(dir);
    io::write_file(dir / "uip.csv", csv);
    io::write_file(dir / "uip.json", results.dump(2) + "\n");
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// vecm

struct VecmArgs {
  std::string panel;
  std::string market;
  std::optional<int> lags;
  std::optional<int> rank;
  std::string frequency = "daily";
  std::string rate = "borrow";
  int horizon = 30;
  int max_lags = 8;
  std::string out_dir = ".";
};

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

int cmd_vecm(const VecmArgs& a, std::ostream& out, std::ostream& err) {
  const econ::Frequency freq = econ::parse_frequency(a.frequency);
  const bool borrow = parse_rate_kind(a.rate);
  if (a.horizon < 1) usage_error("--horizon must be >= 1");
  if (a.lags && *a.lags < 1) usage_error("--lags must be >= 1");
  const auto rows = io::parse_panel(io::read_file(resolve_input(a.panel)));

  std::vector<std::string> platforms;
  std::vector<std::string> markets;
  for (const auto& r : rows) {
    if (std::find(markets.begin(), markets.end(), r.market) == markets.end()) markets.push_back(r.market);
    if (r.market == a.market && std::find(platforms.begin(), platforms.end(), r.platform) == platforms.end()) {
      platforms.push_back(r.platform);
    }
  }
  if (platforms.empty()) {
    std::string avail;
    for (const auto& m : markets) avail += (avail.empty() ? "" : ", ") + m;
    usage_error("market '" + a.market + "' not in panel; available: " + avail);
  }
  if (platforms.size() < 2) usage_error("market '" + a.market + "' is quoted on fewer than two platforms");
  if (platforms.size() > 6) usage_error("at most six platforms are supported");

  const auto groups = group_panel(rows);
  std::vector<econ::RateSeries> parts;
  for (const auto& pl : platforms) {
    parts.push_back(resample_field(groups.at({pl, a.market}), freq, econ::Aggregation::Mean, borrow ? borrow_of : supply_of));
  }
  const auto aligned = econ::align(parts);
  const auto k = static_cast<Eigen::Index>(platforms.size());
  Eigen::MatrixXd y(static_cast<Eigen::Index>(aligned[0].size()), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index t = 0; t < y.rows(); ++t) y(t, j) = aligned[static_cast<std::size_t>(j)].values[static_cast<std::size_t>(t)];
  }

  int lags = 0;
  std::optional<econ::LagSelection> selection;
  if (a.lags) {
    lags = *a.lags;
  } else {
    const int feasible = static_cast<int>((y.rows() - 12) / (k + 1)) - 1;
    const int max_lags = std::max(1, std::min(a.max_lags, feasible));
    selection = econ::select_lag_order(y, max_lags);
    lags = selection->aic;
  }
  const econ::VecmFit fit = econ::vecm_fit(y, a.rank, lags);
  const auto& jo = fit.johansen;

  out << "VECM for " << a.market << " " << a.rate << " rates, " << econ::to_string(freq) << ", K=" << k << ", p=" << lags
      << ", T_eff=" << fit.n_eff << "\n";
  out << "variables:";
  for (const auto& pl : platforms) out << ' ' << pl;
  out << "\n";
  if (selection) out << "lag order chosen by AIC (BIC suggests " << selection->bic << ")\n";
  out << "\nJohansen trace test (constant restricted to the cointegrating space)\n";
  auto pad = [](std::string text, std::size_t width) {
    if (text.size() < width) text.insert(0, width - text.size(), ' ');
    return text;
  };
  out << "r  eigenvalue      trace     cv10      cv5      cv1  at 5%\n";
  for (int r = 0; r < k; ++r) {
    const auto& cv = jo.critical[static_cast<std::size_t>(r)];
    const double stat = jo.trace_stats[static_cast<std::size_t>(r)];
    out << r << "  " << pad(fmt(jo.eigenvalues[static_cast<std::size_t>(r)], 6), 10) << pad(fmt(stat, 3), 11)
        << pad(fmt(cv.p10, 2), 9) << pad(fmt(cv.p05, 2), 9) << pad(fmt(cv.p01, 2), 9) << "  "
        << (stat >= cv.p05 ? "reject" : "accept") << "\n";
  }
  out << "selected rank: " << jo.rank << (a.rank ? ", using rank " + std::to_string(fit.rank) : std::string()) << "\n";
  for (const auto& w : fit.warnings) err << "warning: " << w << "\n";

  out << "\nLong-run relations\n";
  if (fit.rank == 0) out << "(none)\n";
  for (int j = 0; j < fit.rank; ++j) {
    out << platforms[static_cast<std::size_t>(j)] << " =";
    bool first = true;
    auto term = [&](double v, const std::string& name) {
      out << (first ? (v < 0 ? " -" : " ") : (v < 0 ? " - " : " + ")) << fmt(std::fabs(v), 4) << name;
      first = false;
    };
    for (Eigen::Index i = fit.rank; i < k; ++i) term(-fit.beta(i, j), " " + platforms[static_cast<std::size_t>(i)]);
    term(-fit.rho(j), "");
    out << "\n";
  }

  out << "\nShort-run coefficients (columns: equations)\n";
  out << "term";
  for (const auto& pl : platforms) out << ",D_" << pl;
  out << "\n";
  std::vector<std::vector<std::string>> coef_rows;
  auto add_row = [&](const std::string& term, const Eigen::VectorXd& v) {
    std::vector<std::string> row{term};
    out << term;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      row.push_back(num(v(i)));
      out << ',' << fmt(v(i), 6);
    }
    out << "\n";
    coef_rows.push_back(std::move(row));
  };
  for (int j = 0; j < fit.rank; ++j) add_row("ect" + std::to_string(j + 1), fit.alpha.col(j));
  for (std::size_t l = 0; l < fit.gamma.size(); ++l) {
    for (Eigen::Index i = 0; i < k; ++i) {
      add_row("D_" + platforms[static_cast<std::size_t>(i)] + "(-" + std::to_string(l + 1) + ")", fit.gamma[l].col(i));
    }
  }
  add_row("nu", fit.nu);

  const econ::StabilityReport st = econ::stability_check(fit);
  out << "\nCompanion roots: " << st.unit_roots << " unit (expected " << st.expected_unit_roots << "), "
      << st.near_unit_roots << " near-unit, " << st.explosive_roots << " explosive; largest moduli:";
  for (std::size_t i = 0; i < std::min<std::size_t>(st.moduli.size(), 5); ++i) out << ' ' << fmt(st.moduli[i], 4);
  out << "\n";
  if (st.flagged) err << "warning: stability check flagged the fit\n";

  out << "\nResidual diagnostics (summary only)\nequation,ljung_box_q,ljung_box_p,jarque_bera,jarque_bera_p\n";
  Json diag = Json::array();
  const int lb_lags = static_cast<int>(std::min<Eigen::Index>(10, fit.residuals.rows() - 1));
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto lb = econ::ljung_box(fit.residuals.col(i), lb_lags);
    const auto jb = econ::jarque_bera(fit.residuals.col(i));
    out << "D_" << platforms[static_cast<std::size_t>(i)] << ',' << fmt(lb.q, 3) << ',' << fmt(lb.p_value, 4) << ','
        << fmt(jb.stat, 3) << ',' << fmt(jb.p_value, 4) << "\n";
    diag.push_back({{"equation", platforms[static_cast<std::size_t>(i)]},
                    {"ljung_box_q", lb.q},
                    {"ljung_box_lags", lb.df},
                    {"ljung_box_p", lb.p_value},
                    {"jarque_bera", jb.stat},
                    {"jarque_bera_p", jb.p_value}});
  }

  const econ::IrfResult ir = econ::irf(fit, a.horizon);
  std::vector<std::vector<std::string>> irf_rows;
  for (std::size_t h = 0; h < ir.responses.size(); ++h) {
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) {
        irf_rows.push_back({std::to_string(h), platforms[static_cast<std::size_t>(i)],
                            platforms[static_cast<std::size_t>(j)], num(ir.responses[h](i, j))});
      }
    }
  }

  Json doc;
  doc["market"] = a.market;
  doc["rate"] = a.rate;
  doc["frequency"] = std::string(econ::to_string(freq));
  doc["variables"] = platforms;
  doc["k"] = k;
  doc["lags"] = lags;
  doc["rank"] = fit.rank;
  doc["n_eff"] = fit.n_eff;
  doc["eigenvalues"] = jo.eigenvalues;
  doc["trace_stats"] = jo.trace_stats;
  doc["selected_rank"] = jo.rank;
  doc["alpha"] = matrix_json(fit.alpha);
  doc["beta"] = matrix_json(fit.beta);
  doc["rho"] = std::vector<double>(fit.rho.data(), fit.rho.data() + fit.rho.size());
  doc["nu"] = std::vector<double>(fit.nu.data(), fit.nu.data() + fit.nu.size());
  Json gammas = Json::array();
  for (const auto& g : fit.gamma) gammas.push_back(matrix_json(g));
  doc["gamma"] = gammas;
  doc["omega"] = matrix_json(fit.omega);
  doc["stability"] = {{"moduli", st.moduli},
                      {"unit_roots", st.unit_roots},
                      {"expected_unit_roots", st.expected_unit_roots},
                      {"near_unit_roots", st.near_unit_roots},
                      {"explosive_roots", st.explosive_roots},
                      {"flagged", st.flagged}};
  doc["diagnostics"] = diag;
  doc["warnings"] = fit.warnings;

  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  std::vector<std::string> coef_header{"term"};
  for (const auto& pl : platforms) coef_header.push_back("D_" + pl);
  io::write_file(dir / "vecm_coefficients.csv", io::to_csv(coef_header, coef_rows));
  io::write_file(dir / "irf.csv", io::to_csv({"horizon", "response", "shock", "value"}, irf_rows));
  io::write_file(dir / "vecm.json", doc.dump(2) + "\n");
  out << "\nwrote " << (dir / "vecm_coefficients.csv").string() << ", " << (dir / "irf.csv").string() << ", "
      << (dir / "vecm.json").string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// liquidity

struct LiquidityArgs {
  std::string input;
  std::string balances;
  std::optional<std::string> out_dir;
};

int cmd_liquidity(const LiquidityArgs& a, std::ostream& out) {
  if (a.input.empty() && a.balances.empty()) usage_error("give an input CSV and/or --balances");
  std::vector<std::vector<std::string>> band_rows;
  std::vector<std::vector<std::string>> series_rows;
  std::vector<std::vector<std::string>> median_rows;

  if (!a.input.empty()) {
    const std::string text = io::read_file(resolve_input(a.input));
    const io::CsvTable probe = io::parse_csv(text);
    if (probe.find_column("block") && probe.find_column("A")) {
      const auto snaps = io::parse_snapshots(text);
      std::vector<double> supply;
      std::vector<double> borrows;
      std::vector<double> u;
      for (const auto& s : snaps) {
        supply.push_back(s.gross_deposits.to_double());
        borrows.push_back(s.total_loans.to_double());
        u.push_back(s.utilization.to_double());
      }
      for (const auto& b : analytics::illiquidity_bands(u)) {
        band_rows.push_back({"snapshot", std::string(analytics::band_label(b.band)), std::to_string(snaps[b.start].block),
                             std::to_string(snaps[b.end - 1].block), std::to_string(b.end - b.start)});
      }
      for (std::size_t i = 0; i < snaps.size(); ++i) {
        series_rows.push_back({"snapshot", std::to_string(snaps[i].block), (snaps[i].gross_deposits - snaps[i].total_loans).to_string(),
                               snaps[i].utilization.to_string()});
      }
      if (!supply.empty()) median_rows.push_back({"snapshot", num(analytics::median_locked(supply))});
    } else {
      const auto groups = group_panel(io::parse_panel(text));
      for (const auto& [key, rows] : groups) {
        const std::string source = key.platform + ":" + key.market;
        std::vector<double> supply;
        std::vector<double> borrows;
        for (const auto& r : rows) {
          supply.push_back(r.total_supply);
          borrows.push_back(r.total_borrows);
        }
        const auto points = analytics::liquidity_series(supply, borrows);
        std::vector<double> u;
        for (std::size_t i = 0; i < points.size(); ++i) {
          u.push_back(points[i].utilization);
          series_rows.push_back({source, econ::format_iso_date(rows[i].day), num(points[i].available), num(points[i].utilization)});
        }
        for (const auto& b : analytics::illiquidity_bands(u)) {
          band_rows.push_back({source, std::string(analytics::band_label(b.band)), econ::format_iso_date(rows[b.start].day),
                               econ::format_iso_date(rows[b.end - 1].day), std::to_string(b.end - b.start)});
        }
        median_rows.push_back({source, num(analytics::median_locked(supply))});
      }
    }
  }

  std::vector<std::vector<std::string>> conc_rows;
  if (!a.balances.empty()) {
    const auto balances = io::parse_balances(io::read_file(resolve_input(a.balances)));
    std::vector<double> values;
    for (const auto& [acct, v] : balances) values.push_back(v);
    const auto c = analytics::concentration(values);
    // Accounts re-sorted alongside their balances, ties by name.
    auto sorted = balances;
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) {
      return x.second != y.second ? x.second > y.second : x.first < y.first;
    });
    for (std::size_t i = 0; i < c.curve.size(); ++i) {
      conc_rows.push_back({std::to_string(i + 1), sorted[i].first, num(c.balances[i]), num(c.curve[i])});
    }
  }

  const std::vector<std::string> band_header{"source", "band", "start", "end", "periods"};
  const std::vector<std::string> conc_header{"rank", "account", "balance", "cumulative_share"};
  if (!a.input.empty()) {
    out << io::to_csv(band_header, band_rows);
  } else {
    out << io::to_csv(conc_header, conc_rows);
  }
  if (a.out_dir) {
    const fs::path dir(*a.out_dir);
    ensure_dir(dir);
    if (!a.input.empty()) {
      io::write_file(dir / "bands.csv", io::to_csv(band_header, band_rows));
      io::write_file(dir / "liquidity.csv", io::to_csv({"source", "period", "available", "utilization"}, series_rows));
      io::write_file(dir / "median_locked.csv", io::to_csv({"source", "median_total_supply"}, median_rows));
    }
    if (!a.balances.empty()) io::write_file(dir / "concentration.csv", io::to_csv(conc_header, conc_rows));
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// experiments

struct ExperimentArgs {
  std::string scenario;
  std::string kinks = "0.9,0.8";
  std::string model;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

std::string experiment_csv(const std::vector<ExperimentRow>& rows) {
  std::vector<std::vector<std::string>> out;
  for (const auto& r : rows) {
    const auto& u = r.utilization;
    out.push_back({r.label, r.kink ? num(*r.kink) : "", num(u.mode_bin_center), num(u.median), num(u.mean),
                   num(u.std_dev), num(u.fraction_above_095), num(u.fraction_in_080_090), num(u.fraction_in_090_100),
                   num(u.fraction_at_or_above_100), num(u.mean_distance_from_one), num(r.mean_borrow_rate_annual),
                   std::to_string(r.liquidations)});
  }
  return io::to_csv({"label", "kink", "mode_bin_center", "median", "mean", "std_dev", "fraction_above_095",
                     "fraction_in_080_090", "fraction_in_090_100", "fraction_at_or_above_100",
                     "mean_distance_from_one", "mean_borrow_rate_annual", "liquidations"},
                    out);
}

int finish_experiment(const std::vector<ExperimentRow>& rows, const ExperimentArgs& a, std::ostream& out,
                      const std::string& file) {
  const std::string csv = experiment_csv(rows);
  out << csv;
  if (a.out_dir) {
    const fs::path dir(*a.out_dir);
    ensure_dir(dir);
    io::write_file(dir / file, csv);
  }
  return kExitOk;
}

int cmd_experiment_kink(const ExperimentArgs& a, std::ostream& out) {
  Scenario s = io::load_scenario(resolve_input(a.scenario));
  if (a.seed) s.rng_seed = *a.seed;
  std::vector<FixedDec> kinks;
  for (const auto& k : split(a.kinks, ',')) {
    const FixedDec v = FixedDec::parse(k);
    if (v <= FixedDec::zero() || v > FixedDec::one()) usage_error("kink points must lie in (0, 1]");
    kinks.push_back(v);
  }
  if (kinks.empty()) usage_error("--kinks is empty");
  return finish_experiment(kink_placement_experiment(s, kinks), a, out, "experiment_kink.csv");
}

int cmd_experiment_smooth(const ExperimentArgs& a, std::ostream& out) {
  Scenario s = io::load_scenario(resolve_input(a.scenario));
  if (a.seed) s.rng_seed = *a.seed;
  RateModel alternative;
  if (!a.model.empty()) {
    alternative = io::load_model_file(resolve_input(a.model)).front().model;
  } else {
    const auto* k = std::get_if<KinkedModel>(&s.model_schedule.front().model);
    if (k == nullptr) usage_error("scenario's first model is not kinked; pass --model");
    alternative = matched_nonlinear(*k);
  }
  return finish_experiment(smooth_vs_kinked_experiment(s, alternative), a, out, "experiment_smooth.csv");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"plflab: loanable-funds market simulator and rate econometrics"};
  app.name("plflab");
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Run a scenario; writes snapshot.csv and summary.json");
  c_sim->add_option("scenario", sim.scenario, "Scenario JSON")->required();
  c_sim->add_option("--out", sim.out_dir, "Output directory")->capture_default_str();
  c_sim->add_option("--seed", sim.seed, "Override the scenario rng_seed");
  c_sim->add_flag("--events", sim.events, "Also write events.csv");
  c_sim->add_flag("--check-invariants", sim.check_invariants, "Verify engine invariants after every block");

  RatesArgs rates;
  auto* c_rates = app.add_subcommand("rates", "Tabulate a rate model over a utilization grid (CSV on stdout)");
  c_rates->add_option("model", rates.model, "Model or schedule JSON")->required();
  c_rates->add_option("--grid", rates.grid, "start:stop:step or comma list")->capture_default_str();
  c_rates->add_flag("--per-block", rates.per_block, "Print per-block rates instead of annualized");
  c_rates->add_option("--blocks-per-year", rates.blocks_per_year)->capture_default_str();
  c_rates->add_option("--at-block", rates.at_block, "Use the schedule entry active at this block");
  c_rates->add_option("--reserve-factor", rates.reserve_factor, "Reserve factor for the aave family")
      ->capture_default_str();

  UipArgs uip;
  auto* c_uip = app.add_subcommand("uip", "UIP regressions for market pairs within a platform");
  c_uip->add_option("panel", uip.panel, "Panel CSV")->required();
  c_uip->add_option("--pairs", uip.pairs, "platform:I/J[,platform:I/J...]; default all priced pairs");
  c_uip->add_option("--frequency", uip.frequency, "daily|weekly")->capture_default_str();
  c_uip->add_option("--hac-lags", uip.hac_lags, "Newey-West lags; default floor(4 (n/100)^(2/9))");
  c_uip->add_option("--rate", uip.rate, "borrow|supply")->capture_default_str();
  c_uip->add_option("--out", uip.out_dir, "Also write uip.csv and uip.json here");

  VecmArgs vecm;
  auto* c_vecm = app.add_subcommand("vecm", "Johansen test and VECM fit across platforms for one market");
  c_vecm->add_option("panel", vecm.panel, "Panel CSV")->required();
  c_vecm->add_option("--market", vecm.market, "Market (token) to analyse")->required();
  c_vecm->add_option("--lags", vecm.lags, "Level-VAR lag order p; default by AIC");
  c_vecm->add_option("--max-lags", vecm.max_lags, "Upper bound for the AIC search")->capture_default_str();
  c_vecm->add_option("--rank", vecm.rank, "Cointegration rank; default from the trace test");
  c_vecm->add_option("--frequency", vecm.frequency, "daily|weekly")->capture_default_str();
  c_vecm->add_option("--rate", vecm.rate, "borrow|supply")->capture_default_str();
  c_vecm->add_option("--horizon", vecm.horizon, "IRF horizon")->capture_default_str();
  c_vecm->add_option("--out", vecm.out_dir, "Output directory")->capture_default_str();

  LiquidityArgs liq;
  auto* c_liq = app.add_subcommand("liquidity", "Illiquidity bands, median locked value and concentration");
  c_liq->add_option("input", liq.input, "Panel CSV or snapshot CSV");
  c_liq->add_option("--balances", liq.balances, "account,balance CSV for the concentration curve");
  c_liq->add_option("--out", liq.out_dir, "Write bands.csv, liquidity.csv, median_locked.csv, concentration.csv");

  ExperimentArgs kink;
  auto* c_kink = app.add_subcommand("experiment-kink", "Re-run a scenario with different kink points");
  c_kink->add_option("scenario", kink.scenario, "Scenario JSON")->required();
  c_kink->add_option("--kinks", kink.kinks, "Comma-separated kink utilizations")->capture_default_str();
  c_kink->add_option("--seed", kink.seed, "Override the scenario rng_seed");
  c_kink->add_option("--out", kink.out_dir, "Also write experiment_kink.csv here");

  ExperimentArgs smooth;
  auto* c_smooth = app.add_subcommand("experiment-smooth", "Compare a scenario against a smooth rate model");
  c_smooth->add_option("scenario", smooth.scenario, "Scenario JSON")->required();
  c_smooth->add_option("--model", smooth.model, "Alternative model JSON; default matched non-linear");
  c_smooth->add_option("--seed", smooth.seed, "Override the scenario rng_seed");
  c_smooth->add_option("--out", smooth.out_dir, "Also write experiment_smooth.csv here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (c_sim->parsed()) return cmd_simulate(sim, out);
    if (c_rates->parsed()) return cmd_rates(rates, out);
    if (c_uip->parsed()) return cmd_uip(uip, out, err);
    if (c_vecm->parsed()) return cmd_vecm(vecm, out, err);
    if (c_liq->parsed()) return cmd_liquidity(liq, out);
    if (c_kink->parsed()) return cmd_experiment_kink(kink, out);
    if (c_smooth->parsed()) return cmd_experiment_smooth(smooth, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitInput;
}

}  // namespace plf::cli
