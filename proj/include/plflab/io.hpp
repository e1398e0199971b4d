#pragma once

// File formats: RFC-4180 CSV, the rate panel, simulator snapshots and event
// logs, model parameter files and scenario files (JSON).
//
// Model file (one object, or {"models": [...]} for a schedule):
//   {"model": "kinked", "alpha": "<mantissa>", "beta": ..., "gamma": ...,
//    "u_star": ..., "lambda": ..., "effective_from_block": 0, "label": "..."}
// Families and fields: linear {alpha, beta}; nonlinear {alpha, beta, gamma,
// lambda}; kinked {alpha, beta, gamma, u_star, lambda}; aave {base,
// u_optimal, r_slope1, r_slope2}. Values are 1e18-mantissa integer strings.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plflab/market_engine.hpp"
#include "plflab/rate_models.hpp"
#include "plflab/simulator.hpp"

namespace plf::io {

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary file in the same directory, then renames.
void write_file(const std::filesystem::path& path, std::string_view content);

// ---------------------------------------------------------------------------
// CSV

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;  // 1-based line where each row starts

  /// Index of a header column; throws SchemaError naming the missing column.
  std::size_t column(std::string_view name) const;
  std::optional<std::size_t> find_column(std::string_view name) const;
};

/// Header row mandatory; every row must have the header's field count.
CsvTable parse_csv(std::string_view text);

std::string csv_escape(std::string_view field);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);
std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);

/// Strict decimal parse of a CSV field (no trailing garbage, finite).
double parse_double(std::string_view text, std::string_view what);
/// Shortest round-trip representation.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Rate panel: date,platform,market,borrow_rate,supply_rate,total_supply,total_borrows[,price]

struct PanelRow {
  std::int64_t day = 0;  // days since 1970-01-01
  std::string platform;
  std::string market;
  double borrow_rate = 0.0;  // annualized
  double supply_rate = 0.0;  // annualized
  double total_supply = 0.0;
  double total_borrows = 0.0;
  std::optional<double> price;  // market token price in a common numeraire
};

std::vector<PanelRow> parse_panel(std::string_view text);
std::string write_panel(const std::vector<PanelRow>& rows);

// ---------------------------------------------------------------------------
// Simulator outputs

inline constexpr std::string_view kSnapshotHeader = "block,A,L,reserves,index,utilization,borrow_rate,supply_rate";
std::string write_snapshots(const std::vector<BlockSnapshot>& series);
std::vector<BlockSnapshot> parse_snapshots(std::string_view text);

inline constexpr std::string_view kEventHeader = "block,action,account,amount";
std::string write_events(const std::vector<Event>& events);
std::vector<Event> parse_events(std::string_view text);

std::string summary_json(const Scenario& scenario, const SimOutput& out);

// ---------------------------------------------------------------------------
// JSON documents

/// Throws ParseError with "line L, column C" for malformed JSON and
/// SchemaError for well-formed documents with missing or invalid fields.
std::vector<ScheduledModel> parse_model_file(std::string_view text);
std::vector<ScheduledModel> load_model_file(const std::filesystem::path& path);
std::string model_to_json(const ScheduledModel& m);

/// Scenario schema version 1. See the README for the field reference.
/// Relative "model_file" paths resolve against `base_dir`.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Balances: account,balance

std::vector<std::pair<std::string, double>> parse_balances(std::string_view text);

}  // namespace plf::io
