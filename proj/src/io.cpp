#include "plflab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "plflab/econometrics/series.hpp"
#include "plflab/error.hpp"

namespace plf::io {

using Json = nlohmann::ordered_json;

namespace {

[[noreturn]] void schema(const std::string& msg) { throw Error(ErrorCode::SchemaError, msg); }

std::string line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  const std::size_t end = std::min(text.size(), byte > 0 ? byte - 1 : 0);
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::string what = e.what();
    // Drop the library's "[json.exception.parse_error.101] parse error at ...:" prefix.
    if (const auto pos = what.rfind(": "); pos != std::string::npos) what = what.substr(pos + 2);
    throw Error(ErrorCode::ParseError, "malformed JSON at " + line_col(text, e.byte) + ": " + what);
  }
}

void expect_object(const Json& j, const std::string& ctx) {
  if (!j.is_object()) schema(ctx + " must be a JSON object");
}

void check_keys(const Json& j, std::initializer_list<std::string_view> allowed, const std::string& ctx) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      schema(ctx + ": unknown field '" + key + "'");
    }
  }
}

const Json& field(const Json& j, const std::string& key, const std::string& ctx) {
  const auto it = j.find(key);
  if (it == j.end()) schema(ctx + ": missing field '" + key + "'");
  return *it;
}

std::string string_field(const Json& j, const std::string& key, const std::string& ctx) {
  const Json& v = field(j, key, ctx);
  if (!v.is_string()) schema(ctx + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

std::int64_t int_field(const Json& j, const std::string& key, const std::string& ctx) {
  const Json& v = field(j, key, ctx);
  if (!v.is_number_integer()) schema(ctx + ": field '" + key + "' must be an integer");
  return v.get<std::int64_t>();
}

FixedDec mantissa_field(const Json& j, const std::string& key, const std::string& ctx) {
  const std::string s = string_field(j, key, ctx);
  try {
    return FixedDec::parse_mantissa(s);
  } catch (const Error& e) {
    schema(ctx + ": field '" + key + "': " + e.message());
  }
}

FixedDec decimal_value(const Json& v, const std::string& what) {
  if (!v.is_string()) schema(what + " must be a decimal string");
  try {
    return FixedDec::parse(v.get<std::string>());
  } catch (const Error& e) {
    schema(what + ": " + e.message());
  }
}

FixedDec decimal_field(const Json& j, const std::string& key, const std::string& ctx) {
  return decimal_value(field(j, key, ctx), ctx + ": field '" + key + "'");
}

FixedDec decimal_or(const Json& j, const std::string& key, const std::string& ctx, FixedDec fallback) {
  return j.contains(key) ? decimal_field(j, key, ctx) : fallback;
}

ScheduledModel parse_model_object(const Json& j, const std::string& ctx) {
  expect_object(j, ctx);
  const std::string family = string_field(j, "model", ctx);
  ScheduledModel m;
  if (family == "linear") {
    check_keys(j, {"model", "alpha", "beta", "effective_from_block", "label"}, ctx);
    m.model = LinearModel{mantissa_field(j, "alpha", ctx), mantissa_field(j, "beta", ctx)};
  } else if (family == "nonlinear") {
    check_keys(j, {"model", "alpha", "beta", "gamma", "lambda", "effective_from_block", "label"}, ctx);
    m.model = NonLinearModel{mantissa_field(j, "alpha", ctx), mantissa_field(j, "beta", ctx),
                             mantissa_field(j, "gamma", ctx), mantissa_field(j, "lambda", ctx)};
  } else if (family == "kinked") {
    check_keys(j, {"model", "alpha", "beta", "gamma", "u_star", "lambda", "effective_from_block", "label"}, ctx);
    m.model = KinkedModel{mantissa_field(j, "alpha", ctx), mantissa_field(j, "beta", ctx),
                          mantissa_field(j, "gamma", ctx), mantissa_field(j, "u_star", ctx),
                          mantissa_field(j, "lambda", ctx)};
  } else if (family == "aave") {
    check_keys(j, {"model", "base", "u_optimal", "r_slope1", "r_slope2", "effective_from_block", "label"}, ctx);
    m.model = AaveVariableModel{mantissa_field(j, "base", ctx), mantissa_field(j, "u_optimal", ctx),
                                mantissa_field(j, "r_slope1", ctx), mantissa_field(j, "r_slope2", ctx)};
  } else {
    schema(ctx + ": unknown model '" + family + "' (expected linear|nonlinear|kinked|aave)");
  }
  m.block = int_field(j, "effective_from_block", ctx);
  if (m.block < 0) schema(ctx + ": effective_from_block must be >= 0");
  m.label = j.contains("label") ? string_field(j, "label", ctx) : std::string(model_name(m.model));
  try {
    validate(m.model);
  } catch (const Error& e) {
    schema(ctx + ": " + e.message());
  }
  return m;
}

std::vector<ScheduledModel> parse_model_json(const Json& doc) {
  std::vector<ScheduledModel> out;
  if (doc.is_object() && doc.contains("models")) {
    check_keys(doc, {"schema_version", "market", "description", "models"}, "model schedule");
    const Json& arr = doc["models"];
    if (!arr.is_array() || arr.empty()) schema("model schedule: 'models' must be a non-empty array");
    for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(parse_model_object(arr[i], "models[" + std::to_string(i) + "]"));
  } else if (doc.is_array()) {
    if (doc.empty()) schema("model schedule is empty");
    for (std::size_t i = 0; i < doc.size(); ++i) out.push_back(parse_model_object(doc[i], "models[" + std::to_string(i) + "]"));
  } else {
    out.push_back(parse_model_object(doc, "model"));
  }
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].block == out[i - 1].block) {
      throw Error(ErrorCode::ScheduleConflict,
                  "model schedule: two models effective at block " + std::to_string(out[i].block));
    }
    if (out[i].block < out[i - 1].block) schema("model schedule: effective_from_block must be strictly increasing");
  }
  return out;
}

Json model_json(const ScheduledModel& m) {
  Json j;
  j["model"] = std::string(model_name(m.model));
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          j["alpha"] = v.alpha.mantissa_string();
          j["beta"] = v.beta.mantissa_string();
        } else if constexpr (std::is_same_v<T, NonLinearModel>) {
          j["alpha"] = v.alpha.mantissa_string();
          j["beta"] = v.beta.mantissa_string();
          j["gamma"] = v.gamma.mantissa_string();
          j["lambda"] = v.lambda.mantissa_string();
        } else if constexpr (std::is_same_v<T, KinkedModel>) {
          j["alpha"] = v.alpha.mantissa_string();
          j["beta"] = v.beta.mantissa_string();
          j["gamma"] = v.gamma.mantissa_string();
          j["u_star"] = v.u_star.mantissa_string();
          j["lambda"] = v.lambda.mantissa_string();
        } else {
          j["base"] = v.base.mantissa_string();
          j["u_optimal"] = v.u_optimal.mantissa_string();
          j["r_slope1"] = v.r_slope1.mantissa_string();
          j["r_slope2"] = v.r_slope2.mantissa_string();
        }
      },
      m.model);
  j["effective_from_block"] = m.block;
  j["label"] = m.label;
  return j;
}

std::vector<AgentSpec> parse_agent_group(const Json& g, const std::string& ctx) {
  expect_object(g, ctx);
  check_keys(g, {"kind", "count", "target_rate", "size", "responsiveness", "noise_scale", "initial_fraction",
                 "collateral_ratio"},
             ctx);
  AgentSpec base;
  const std::string kind = string_field(g, "kind", ctx);
  if (kind == "borrower") {
    base.kind = AgentKind::Borrower;
  } else if (kind == "supplier") {
    base.kind = AgentKind::Supplier;
  } else {
    schema(ctx + ": kind must be borrower|supplier, got '" + kind + "'");
  }
  const std::int64_t count = g.contains("count") ? int_field(g, "count", ctx) : 1;
  if (count < 1 || count > 100000) schema(ctx + ": count must lie in [1, 100000]");
  base.size = decimal_field(g, "size", ctx);
  base.responsiveness = decimal_or(g, "responsiveness", ctx, base.responsiveness);
  base.noise_scale = decimal_or(g, "noise_scale", ctx, FixedDec::zero());
  base.initial_fraction = decimal_or(g, "initial_fraction", ctx, FixedDec::zero());
  base.collateral_ratio = decimal_or(g, "collateral_ratio", ctx, base.collateral_ratio);

  FixedDec from;
  FixedDec to;
  const Json& tr = field(g, "target_rate", ctx);
  if (tr.is_object()) {
    check_keys(tr, {"from", "to"}, ctx + ".target_rate");
    from = decimal_field(tr, "from", ctx + ".target_rate");
    to = decimal_field(tr, "to", ctx + ".target_rate");
  } else {
    from = to = decimal_value(tr, ctx + ": field 'target_rate'");
  }
  std::vector<AgentSpec> out;
  for (std::int64_t i = 0; i < count; ++i) {
    AgentSpec a = base;
    a.target_rate = count == 1 ? from : from + mul_div(to - from, FixedDec::from_int(i), FixedDec::from_int(count - 1));
    out.push_back(a);
  }
  return out;
}

std::string fixed(FixedDec v) { return v.to_string(); }

}  // namespace

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "error reading '" + path.string() + "'");
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::IoError, "error writing '" + path.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot move output into '" + path.string() + "': " + ec.message());
}

// ---------------------------------------------------------------------------
// CSV

std::optional<std::size_t> CsvTable::find_column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

std::size_t CsvTable::column(std::string_view name) const {
  if (auto c = find_column(name)) return *c;
  schema("missing CSV column '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> lines;
  std::vector<std::string> record;
  std::string fieldbuf;
  std::size_t line = 1;
  std::size_t record_line = 1;
  std::size_t i = 0;
  bool at_record_start = true;

  auto end_field = [&]() {
    record.push_back(std::move(fieldbuf));
    fieldbuf.clear();
  };
  auto end_record = [&]() {
    end_field();
    records.push_back(std::move(record));
    lines.push_back(record_line);
    record.clear();
    at_record_start = true;
  };

  while (i < text.size()) {
    if (at_record_start) {
      record_line = line;
      at_record_start = false;
    }
    const char c = text[i];
    if (c == '"' && fieldbuf.empty()) {
      ++i;
      bool closed = false;
      while (i < text.size()) {
        if (text[i] == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            fieldbuf.push_back('"');
            i += 2;
            continue;
          }
          closed = true;
          ++i;
          break;
        }
        if (text[i] == '\n') ++line;
        fieldbuf.push_back(text[i++]);
      }
      if (!closed) throw Error(ErrorCode::ParseError, "unterminated quoted field starting on line " + std::to_string(record_line));
      if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
        throw Error(ErrorCode::ParseError, "unexpected character after closing quote on line " + std::to_string(line));
      }
      continue;
    }
    if (c == ',') {
      end_field();
      ++i;
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      end_record();
      i += 2;
      ++line;
    } else if (c == '\n') {
      end_record();
      ++i;
      ++line;
    } else {
      if (c == '"') throw Error(ErrorCode::ParseError, "stray quote in unquoted field on line " + std::to_string(line));
      fieldbuf.push_back(c);
      ++i;
    }
  }
  if (!at_record_start) end_record();

  // Blank lines carry no record.
  CsvTable t;
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (records[r].size() == 1 && records[r][0].empty()) continue;
    if (t.header.empty()) {
      t.header = std::move(records[r]);
      continue;
    }
    if (records[r].size() != t.header.size()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lines[r]) + ": expected " +
                                             std::to_string(t.header.size()) + " fields, got " +
                                             std::to_string(records[r].size()));
    }
    t.rows.push_back(std::move(records[r]));
    t.row_lines.push_back(lines[r]);
  }
  if (t.header.empty()) throw Error(ErrorCode::ParseError, "CSV has no header row");
  return t;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    out << csv_escape(fields[i]);
  }
  out << '\n';
}

std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  write_csv_row(out, header);
  for (const auto& r : rows) write_csv_row(out, r);
  return out.str();
}

double parse_double(std::string_view text, std::string_view what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    throw Error(ErrorCode::ParseError, "invalid number '" + std::string(text) + "' in " + std::string(what));
  }
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Panel

std::vector<PanelRow> parse_panel(std::string_view text) {
  const CsvTable t = parse_csv(text);
  const std::size_t c_date = t.column("date");
  const std::size_t c_platform = t.column("platform");
  const std::size_t c_market = t.column("market");
  const std::size_t c_borrow = t.column("borrow_rate");
  const std::size_t c_supply = t.column("supply_rate");
  const std::size_t c_ts = t.column("total_supply");
  const std::size_t c_tb = t.column("total_borrows");
  const auto c_price = t.find_column("price");

  std::vector<PanelRow> out;
  std::set<std::tuple<std::int64_t, std::string, std::string>> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = "panel line " + std::to_string(t.row_lines[r]);
    PanelRow p;
    try {
      p.day = econ::parse_iso_date(row[c_date]);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, where + ": " + e.message());
    }
    p.platform = row[c_platform];
    p.market = row[c_market];
    if (p.platform.empty() || p.market.empty()) throw Error(ErrorCode::ParseError, where + ": empty platform or market");
    p.borrow_rate = parse_double(row[c_borrow], where);
    p.supply_rate = parse_double(row[c_supply], where);
    p.total_supply = parse_double(row[c_ts], where);
    p.total_borrows = parse_double(row[c_tb], where);
    if (c_price && !row[*c_price].empty()) p.price = parse_double(row[*c_price], where);
    if (!seen.emplace(p.day, p.platform, p.market).second) {
      throw Error(ErrorCode::ParseError, where + ": duplicate row for " + row[c_date] + " " + p.platform + "/" + p.market);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string write_panel(const std::vector<PanelRow>& rows) {
  const bool with_price = std::any_of(rows.begin(), rows.end(), [](const PanelRow& r) { return r.price.has_value(); });
  std::vector<std::string> header{"date", "platform", "market", "borrow_rate", "supply_rate", "total_supply", "total_borrows"};
  if (with_price) header.push_back("price");
  std::vector<std::vector<std::string>> out;
  for (const auto& r : rows) {
    std::vector<std::string> f{econ::format_iso_date(r.day), r.platform, r.market, format_double(r.borrow_rate),
                               format_double(r.supply_rate), format_double(r.total_supply),
                               format_double(r.total_borrows)};
    if (with_price) f.push_back(r.price ? format_double(*r.price) : "");
    out.push_back(std::move(f));
  }
  return to_csv(header, out);
}

// ---------------------------------------------------------------------------
// Snapshots and events

std::string write_snapshots(const std::vector<BlockSnapshot>& series) {
  std::string out(kSnapshotHeader);
  out += '\n';
  for (const auto& s : series) {
    out += std::to_string(s.block);
    for (FixedDec v : {s.gross_deposits, s.total_loans, s.reserves, s.index, s.utilization, s.borrow_rate, s.supply_rate}) {
      out += ',';
      out += fixed(v);
    }
    out += '\n';
  }
  return out;
}

std::vector<BlockSnapshot> parse_snapshots(std::string_view text) {
  const CsvTable t = parse_csv(text);
  const std::size_t c_block = t.column("block");
  const std::size_t c_a = t.column("A");
  const std::size_t c_l = t.column("L");
  const std::size_t c_res = t.column("reserves");
  const std::size_t c_idx = t.column("index");
  const std::size_t c_u = t.column("utilization");
  const std::size_t c_b = t.column("borrow_rate");
  const std::size_t c_s = t.column("supply_rate");
  std::vector<BlockSnapshot> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = "snapshot line " + std::to_string(t.row_lines[r]);
    try {
      BlockSnapshot s;
      s.block = std::stoll(row[c_block]);
      s.gross_deposits = FixedDec::parse(row[c_a]);
      s.total_loans = FixedDec::parse(row[c_l]);
      s.reserves = FixedDec::parse(row[c_res]);
      s.index = FixedDec::parse(row[c_idx]);
      s.utilization = FixedDec::parse(row[c_u]);
      s.borrow_rate = FixedDec::parse(row[c_b]);
      s.supply_rate = FixedDec::parse(row[c_s]);
      out.push_back(s);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, where + ": " + e.message());
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, where + ": invalid block number");
    }
  }
  return out;
}

std::string write_events(const std::vector<Event>& events) {
  std::ostringstream out;
  out << kEventHeader << '\n';
  for (const auto& e : events) {
    write_csv_row(out, {std::to_string(e.block), std::string(to_string(e.action)), e.account, fixed(e.amount)});
  }
  return out.str();
}

std::vector<Event> parse_events(std::string_view text) {
  const CsvTable t = parse_csv(text);
  const std::size_t c_block = t.column("block");
  const std::size_t c_action = t.column("action");
  const std::size_t c_account = t.column("account");
  const std::size_t c_amount = t.column("amount");
  std::vector<Event> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = "event line " + std::to_string(t.row_lines[r]);
    try {
      Event e;
      std::size_t used = 0;
      e.block = std::stoll(row[c_block], &used);
      if (used != row[c_block].size()) throw std::invalid_argument("block");
      e.action = parse_action(row[c_action]);
      e.account = row[c_account];
      e.amount = FixedDec::parse(row[c_amount]);
      out.push_back(std::move(e));
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, where + ": " + e.message());
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, where + ": invalid block number");
    }
  }
  return out;
}

std::string summary_json(const Scenario& scenario, const SimOutput& out) {
  const auto& u = out.summary.utilization;
  const std::vector<double> path = out.utilization_path();
  Json j;
  j["schema_version"] = 1;
  j["rng_seed"] = scenario.rng_seed;
  j["horizon_blocks"] = scenario.horizon_blocks;
  j["agents"] = scenario.agents.size();
  j["ceiling_policy"] = std::string(to_string(scenario.ceiling_policy));
  j["utilization"] = {
      {"bin_width", u.bin_width},
      {"mode_bin_center", u.mode_bin_center},
      {"median", u.median},
      {"mean", u.mean},
      {"std_dev", u.std_dev},
      {"fraction_above_095", u.fraction_above_095},
      {"fraction_in_085_095", fraction_within(path, 0.85, 0.95)},
      {"fraction_in_080_090", u.fraction_in_080_090},
      {"fraction_in_090_100", u.fraction_in_090_100},
      {"fraction_at_or_above_100", u.fraction_at_or_above_100},
      {"mean_distance_from_one", u.mean_distance_from_one},
  };
  j["mean_borrow_rate_annual"] = out.summary.mean_borrow_rate_annual;
  j["mean_supply_rate_annual"] = out.summary.mean_supply_rate_annual;
  j["liquidations"] = out.summary.liquidations;
  j["clipped_redeems"] = out.summary.clipped_redeems;
  if (out.final_state) {
    const MarketState& s = *out.final_state;
    j["final_state"] = {
        {"block", s.block_height()},
        {"A", fixed(s.gross_deposits())},
        {"L", fixed(s.total_loans())},
        {"reserves", fixed(s.reserves())},
        {"index", fixed(s.index())},
        {"exchange_rate", fixed(s.exchange_rate())},
        {"utilization", fixed(s.utilization())},
    };
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Models and scenarios

std::vector<ScheduledModel> parse_model_file(std::string_view text) { return parse_model_json(parse_json(text)); }

std::vector<ScheduledModel> load_model_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_model_file(text);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

std::string model_to_json(const ScheduledModel& m) { return model_json(m).dump(2) + "\n"; }

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  const Json doc = parse_json(text);
  const std::string ctx = "scenario";
  expect_object(doc, ctx);
  check_keys(doc, {"schema_version", "description", "rng_seed", "horizon_blocks", "blocks_per_year", "ceiling_policy",
                   "reserve_factor", "liquidation", "model_schedule", "model_file", "price_path", "agent_groups", "agents"},
             ctx);
  if (int_field(doc, "schema_version", ctx) != 1) schema("scenario: unsupported schema_version (expected 1)");

  Scenario s;
  const Json& seed = field(doc, "rng_seed", ctx);
  if (seed.is_number_unsigned() || (seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
    s.rng_seed = seed.get<std::uint64_t>();
  } else {
    schema("scenario: rng_seed must be a non-negative integer");
  }
  s.horizon_blocks = int_field(doc, "horizon_blocks", ctx);
  if (doc.contains("blocks_per_year")) s.blocks_per_year = int_field(doc, "blocks_per_year", ctx);
  if (doc.contains("ceiling_policy")) {
    try {
      s.ceiling_policy = parse_ceiling_policy(string_field(doc, "ceiling_policy", ctx));
    } catch (const Error& e) {
      schema(std::string("scenario: ") + e.message());
    }
  }
  s.reserve_factor = decimal_or(doc, "reserve_factor", ctx, FixedDec::zero());
  if (doc.contains("liquidation")) {
    const Json& l = doc["liquidation"];
    const std::string lctx = "scenario.liquidation";
    expect_object(l, lctx);
    check_keys(l, {"threshold", "discount", "penalty", "close_factor"}, lctx);
    s.liquidation.threshold = decimal_or(l, "threshold", lctx, s.liquidation.threshold);
    s.liquidation.discount = decimal_or(l, "discount", lctx, s.liquidation.discount);
    s.liquidation.penalty = decimal_or(l, "penalty", lctx, s.liquidation.penalty);
    s.liquidation.close_factor = decimal_or(l, "close_factor", lctx, s.liquidation.close_factor);
  }

  const bool inline_models = doc.contains("model_schedule");
  const bool file_models = doc.contains("model_file");
  if (inline_models == file_models) schema("scenario: give exactly one of 'model_schedule' and 'model_file'");
  if (inline_models) {
    s.model_schedule = parse_model_json(doc["model_schedule"]);
  } else {
    std::filesystem::path p = string_field(doc, "model_file", ctx);
    if (p.is_relative()) p = base_dir / p;
    s.model_schedule = load_model_file(p);
  }

  if (doc.contains("price_path")) {
    const Json& pp = doc["price_path"];
    if (!pp.is_array()) schema("scenario: price_path must be an array");
    for (std::size_t i = 0; i < pp.size(); ++i) {
      const std::string pctx = "price_path[" + std::to_string(i) + "]";
      expect_object(pp[i], pctx);
      check_keys(pp[i], {"block", "price"}, pctx);
      s.price_path.push_back({int_field(pp[i], "block", pctx), decimal_field(pp[i], "price", pctx)});
    }
  }
  if (doc.contains("agent_groups")) {
    const Json& groups = doc["agent_groups"];
    if (!groups.is_array()) schema("scenario: agent_groups must be an array");
    for (std::size_t i = 0; i < groups.size(); ++i) {
      auto agents = parse_agent_group(groups[i], "agent_groups[" + std::to_string(i) + "]");
      s.agents.insert(s.agents.end(), agents.begin(), agents.end());
    }
  }
  if (doc.contains("agents")) {
    const Json& agents = doc["agents"];
    if (!agents.is_array()) schema("scenario: agents must be an array");
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const std::string actx = "agents[" + std::to_string(i) + "]";
      if (agents[i].contains("count")) schema(actx + ": 'count' is only valid in agent_groups");
      auto one = parse_agent_group(agents[i], actx);
      s.agents.insert(s.agents.end(), one.begin(), one.end());
    }
  }
  try {
    s.validate();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("scenario: ") + e.message());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_scenario(text, path.parent_path());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError) throw;
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

std::vector<std::pair<std::string, double>> parse_balances(std::string_view text) {
  const CsvTable t = parse_csv(text);
  const std::size_t c_account = t.column("account");
  const std::size_t c_balance = t.column("balance");
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out.emplace_back(t.rows[r][c_account],
                     parse_double(t.rows[r][c_balance], "balances line " + std::to_string(t.row_lines[r])));
  }
  return out;
}

}  // namespace plf::io
