#include <atomic>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "plflab/cli.hpp"
#include "plflab/io.hpp"
#include "plflab/rate_models.hpp"

namespace fs = std::filesystem;
using namespace plf;
using namespace plf::cli;

namespace {

const fs::path kData = fs::path(PLFLAB_SOURCE_DIR) / "data";

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "plflab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  static std::atomic<int> counter{0};
  const fs::path dir = fs::temp_directory_path() / ("plflab_cli_" + name + "_" + std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::vector<std::string>> rows_of(const std::string& csv) { return io::parse_csv(csv).rows; }

std::string panel_csv(const std::vector<double>& supply, const std::vector<double>& borrows) {
  std::vector<io::PanelRow> rows;
  for (std::size_t i = 0; i < supply.size(); ++i) {
    rows.push_back({18262 + static_cast<std::int64_t>(i), "compound", "DAI", 0.05, 0.03, supply[i], borrows[i], {}});
  }
  return io::write_panel(rows);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage") {
    CHECK(invoke({"--help"}).code == kExitOk);
    CHECK(invoke({}).code == kExitInput);
    CHECK(invoke({"frobnicate"}).code == kExitInput);
  }

  TEST_CASE("simulate writes deterministic outputs") {
    const fs::path a = scratch("sim");
    const fs::path b = scratch("sim");
    const std::string scenario = (kData / "scenarios/minimal.json").string();
    REQUIRE(invoke({"simulate", scenario, "--out", a.string()}).code == kExitOk);
    CHECK(fs::exists(a / "snapshot.csv"));
    CHECK(fs::exists(a / "summary.json"));
    CHECK_FALSE(fs::exists(a / "events.csv"));
    REQUIRE(invoke({"simulate", scenario, "--out", b.string()}).code == kExitOk);
    CHECK(io::read_file(a / "snapshot.csv") == io::read_file(b / "snapshot.csv"));
    CHECK(io::read_file(a / "summary.json") == io::read_file(b / "summary.json"));
    CHECK(io::parse_snapshots(io::read_file(a / "snapshot.csv")).size() == 100);

    REQUIRE(invoke({"simulate", scenario, "--out", a.string(), "--events", "--check-invariants", "--seed", "5"}).code ==
            kExitOk);
    CHECK(fs::exists(a / "events.csv"));
  }

  TEST_CASE("simulate input errors") {
    const fs::path dir = scratch("bad");
    io::write_file(dir / "broken.json", "{\n  \"schema_version\": 1,\n  \"rng_seed\": \n}\n");
    const Result r = invoke({"simulate", (dir / "broken.json").string(), "--out", dir.string()});
    CHECK(r.code == kExitInput);
    CHECK(r.err.find("line 4, column") != std::string::npos);
    CHECK(invoke({"simulate", (dir / "missing.json").string()}).code == kExitIo);
  }

  TEST_CASE("rates") {
    const std::string model = (kData / "models/cdai_21feb20.json").string();
    const Result r = invoke({"rates", model, "--grid", "0,0.9,1", "--per-block"});
    REQUIRE(r.code == kExitOk);
    const auto rows = rows_of(r.out);
    REQUIRE(rows.size() == 3);
    const auto k = std::get<KinkedModel>(io::load_model_file(model).front().model);
    CHECK(rows[1][1] == (k.alpha + mul(k.beta, k.u_star)).to_string());
    CHECK(invoke({"rates", model, "--grid", "0:1:0"}).code == kExitInput);
    CHECK(invoke({"rates", model, "--grid", "0:1:x"}).code == kExitInput);
  }

  TEST_CASE("rates match the library over a schedule row") {
    const std::string schedule = (kData / "cdai_schedule.json").string();
    const auto models = io::load_model_file(schedule);
    const ScheduledModel* row = nullptr;
    for (const auto& m : models) {
      if (m.label == "27 Apr '20") row = &m;
    }
    REQUIRE(row != nullptr);
    const Result r = invoke({"rates", schedule, "--per-block", "--at-block", std::to_string(row->block)});
    REQUIRE(r.code == kExitOk);
    const auto rows = rows_of(r.out);
    REQUIRE(rows.size() == 101);
    for (const auto& line : rows) {
      const FixedDec u = FixedDec::parse(line[0]);
      const FixedDec got = FixedDec::parse(line[1]);
      const FixedDec want = borrow_rate(row->model, u);
      const FixedDec gap = got > want ? got - want : want - got;
      CHECK(gap <= FixedDec::from_mantissa(1));
    }
  }

  TEST_CASE("uip") {
    const std::string panel = (kData / "examples/synthetic_panel.csv").string();
    const Result daily = invoke({"uip", panel});
    REQUIRE(daily.code == kExitOk);
    const auto d = io::parse_csv(daily.out);
    const std::size_t p_weak = d.column("p_weak");
    const std::size_t n_obs = d.column("n_obs");
    REQUIRE(d.rows.size() == 3);
    for (const auto& row : d.rows) CHECK(io::parse_double(row[p_weak], "p") > 0.05);

    const Result weekly = invoke({"uip", panel, "--frequency", "weekly"});
    REQUIRE(weekly.code == kExitOk);
    const auto w = io::parse_csv(weekly.out);
    const double ratio = io::parse_double(d.rows[0][n_obs], "n") / io::parse_double(w.rows[0][n_obs], "n");
    CHECK(ratio > 6.5);
    CHECK(ratio < 7.5);

    const fs::path dir = scratch("uip");
    CHECK(invoke({"uip", panel, "--pairs", "compound:DAI/ETH", "--out", dir.string()}).code == kExitOk);
    CHECK(fs::exists(dir / "uip.json"));

    io::write_file(dir / "single.csv", "date\n2020-01-01\n");
    CHECK(invoke({"uip", (dir / "single.csv").string()}).code == kExitInput);
    CHECK(invoke({"uip", panel, "--pairs", "compound:DAI/DAI"}).code == kExitInput);
  }

  TEST_CASE("vecm") {
    const std::string panel = (kData / "examples/synthetic_panel.csv").string();
    const fs::path dir = scratch("vecm");
    const Result r = invoke({"vecm", panel, "--market", "DAI", "--out", dir.string()});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("selected rank: 2") != std::string::npos);
    CHECK(fs::exists(dir / "irf.csv"));
    CHECK(fs::exists(dir / "vecm.json"));
    CHECK(rows_of(io::read_file(dir / "irf.csv")).size() == 31 * 9);

    const Result zero = invoke({"vecm", panel, "--market", "DAI", "--rank", "0", "--out", dir.string()});
    REQUIRE(zero.code == kExitOk);
    CHECK(zero.out.find("Long-run relations\n(none)") != std::string::npos);

    const Result missing = invoke({"vecm", panel, "--market", "XYZ"});
    CHECK(missing.code == kExitInput);
    CHECK(missing.err.find("DAI, ETH, USDC") != std::string::npos);
  }

  TEST_CASE("liquidity") {
    const fs::path dir = scratch("liq");
    io::write_file(dir / "low.csv", panel_csv({100, 100, 100}, {10, 20, 30}));
    const Result low = invoke({"liquidity", (dir / "low.csv").string()});
    REQUIRE(low.code == kExitOk);
    CHECK(rows_of(low.out).empty());

    io::write_file(dir / "high.csv", panel_csv({100, 100, 100, 100}, {85, 85, 95, 101}));
    const Result high = invoke({"liquidity", (dir / "high.csv").string(), "--out", dir.string()});
    REQUIRE(high.code == kExitOk);
    const auto bands = rows_of(high.out);
    REQUIRE(bands.size() == 3);
    CHECK(bands[2][1] == ">=100%");
    CHECK(fs::exists(dir / "median_locked.csv"));

    io::write_file(dir / "balances.csv", "account,balance\na,200\nb,503\nc,297\n");
    const Result conc = invoke({"liquidity", "--balances", (dir / "balances.csv").string()});
    REQUIRE(conc.code == kExitOk);
    const auto curve = rows_of(conc.out);
    REQUIRE(curve.size() == 3);
    CHECK(curve[0][1] == "b");
    CHECK(io::parse_double(curve[0][3], "share") == doctest::Approx(0.503));
    CHECK(curve[2][3] == "1");

    const fs::path sim = scratch("liqsim");
    REQUIRE(invoke({"simulate", (kData / "scenarios/minimal.json").string(), "--out", sim.string()}).code == kExitOk);
    CHECK(invoke({"liquidity", (sim / "snapshot.csv").string()}).code == kExitOk);
    CHECK(invoke({"liquidity"}).code == kExitInput);
  }

  TEST_CASE("experiments") {
    const std::string scenario = (kData / "scenarios/black_thursday.json").string();
    const Result kink = invoke({"experiment-kink", scenario, "--kinks", "0.8,0.9"});
    REQUIRE(kink.code == kExitOk);
    CHECK(kink.out.find("kink=0.8") != std::string::npos);
    const Result smooth = invoke({"experiment-smooth", scenario});
    REQUIRE(smooth.code == kExitOk);
    CHECK(smooth.out.find("alternative:nonlinear") != std::string::npos);
    CHECK(invoke({"experiment-kink", scenario, "--kinks", "1.5"}).code == kExitInput);
  }
}
