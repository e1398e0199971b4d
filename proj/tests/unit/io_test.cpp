#include <filesystem>

#include "doctest.h"
#include "plflab/io.hpp"

using namespace plf;

namespace {

const std::filesystem::path kData = std::filesystem::path(PLFLAB_SOURCE_DIR) / "data";

FixedDec d(const char* s) { return FixedDec::parse(s); }

const Error* caught(auto&& f) {
  static thread_local Error last(ErrorCode::Overflow, "");
  try {
    f();
  } catch (const Error& e) {
    last = e;
    return &last;
  }
  FAIL("expected plf::Error");
  return nullptr;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("csv parsing") {
    const auto t = io::parse_csv("\xEF\xBB\xBF" "a,b\r\n1,\"x,y\"\r\n\r\n2,\"say \"\"hi\"\"\"\n");
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1] == "x,y");
    CHECK(t.rows[1][1] == "say \"hi\"");
    CHECK(t.row_lines[1] == 4);
    CHECK(t.column("b") == 1);
    CHECK(caught([&] { t.column("c"); })->code() == ErrorCode::SchemaError);
    CHECK(caught([] { io::parse_csv("a,b\n1\n"); })->code() == ErrorCode::ParseError);
    CHECK(io::csv_escape("plain") == "plain");
    CHECK(io::csv_escape("a\"b") == "\"a\"\"b\"");
    const std::string text = io::to_csv({"k", "v"}, {{"x,1", "2"}});
    CHECK(io::parse_csv(text).rows[0][0] == "x,1");
  }

  TEST_CASE("numbers") {
    CHECK(io::parse_double("0.25", "x") == 0.25);
    CHECK(caught([] { io::parse_double("0.25abc", "x"); })->code() == ErrorCode::ParseError);
    CHECK(caught([] { io::parse_double("nan", "x"); })->code() == ErrorCode::ParseError);
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::parse_double(io::format_double(1.0 / 3), "x") == 1.0 / 3);
  }

  TEST_CASE("panel round trip") {
    const std::string text = io::read_file(kData / "examples/synthetic_panel.csv");
    const auto rows = io::parse_panel(text);
    CHECK(rows.size() == 2000);
    CHECK(io::write_panel(rows) == text);
    const std::string dup =
        "date,platform,market,borrow_rate,supply_rate,total_supply,total_borrows\n"
        "2020-01-01,compound,DAI,0.1,0.05,10,5\n"
        "2020-01-01,compound,DAI,0.1,0.05,10,5\n";
    CHECK(caught([&] { io::parse_panel(dup); })->code() == ErrorCode::ParseError);
    CHECK(caught([] { io::parse_panel("date,platform\n2020-01-01,x\n"); })->code() == ErrorCode::SchemaError);
  }

  TEST_CASE("snapshots and events round trip") {
    const Scenario s = io::load_scenario(kData / "scenarios/minimal.json");
    RunOptions opts;
    opts.record_events = true;
    const SimOutput out = run(s, opts);
    const std::string snaps = io::write_snapshots(out.series);
    CHECK(snaps.rfind(std::string(io::kSnapshotHeader), 0) == 0);
    CHECK(io::parse_snapshots(snaps) == out.series);
    CHECK(io::parse_events(io::write_events(out.events)) == out.events);
    const std::string json = io::summary_json(s, out);
    CHECK(json.find("\"fraction_in_085_095\"") != std::string::npos);
  }

  TEST_CASE("model files") {
    const auto schedule = io::load_model_file(kData / "cdai_schedule.json");
    REQUIRE(schedule.size() == 10);
    CHECK(schedule[0].block == 0);
    for (std::size_t i = 1; i < schedule.size(); ++i) CHECK(schedule[i].block > schedule[i - 1].block);
    CHECK(std::get<KinkedModel>(schedule[0].model).u_star == d("0.9"));
    const auto again = io::parse_model_file(io::model_to_json(schedule[3]));
    REQUIRE(again.size() == 1);
    CHECK(std::get<KinkedModel>(again[0].model).alpha == std::get<KinkedModel>(schedule[3].model).alpha);

    const Error* bad = caught([] { io::parse_model_file("{\n  \"model\": \"kinked\",\n  oops\n}"); });
    CHECK(bad->code() == ErrorCode::ParseError);
    CHECK(std::string(bad->what()).find("line 3") != std::string::npos);
    CHECK(caught([] { io::parse_model_file(R"({"model": "linear", "alpha": "1"})"); })->code() ==
          ErrorCode::SchemaError);
    CHECK(caught([] { io::parse_model_file(R"({"model": "cubic"})"); })->code() == ErrorCode::SchemaError);
  }

  TEST_CASE("scenarios") {
    const Scenario s = io::load_scenario(kData / "scenarios/reference_kink.json");
    CHECK(s.agents.size() == 70);
    CHECK(s.ceiling_policy == CeilingPolicy::Uncapped);
    const Scenario m = io::load_scenario(kData / "scenarios/minimal.json");
    CHECK(std::holds_alternative<NonLinearModel>(m.model_schedule.front().model));
    CHECK(caught([] { io::parse_scenario(R"({"schema_version": 2, "rng_seed": 1, "horizon_blocks": 5})"); })->code() ==
          ErrorCode::SchemaError);
    CHECK(caught([] { io::load_scenario("/nonexistent/scenario.json"); })->code() == ErrorCode::IoError);
    const std::string conflict = R"({"schema_version": 1, "rng_seed": 1, "horizon_blocks": 5,
      "model_schedule": [
        {"model": "linear", "alpha": "0", "beta": "0", "effective_from_block": 0},
        {"model": "linear", "alpha": "1", "beta": "0", "effective_from_block": 0}]})";
    CHECK(caught([&] { io::parse_scenario(conflict); })->code() == ErrorCode::ScheduleConflict);
  }

  TEST_CASE("balances") {
    const auto b = io::parse_balances("account,balance\nalice,503\nbob,297\n");
    REQUIRE(b.size() == 2);
    CHECK(b[0].first == "alice");
    CHECK(b[1].second == 297);
  }
}
