#include "plflab/econometrics/series.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <map>

#include "plflab/error.hpp"

namespace plf::econ {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

int parse_field(std::string_view text, std::string_view whole) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::ParseError, "invalid date '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

std::string_view to_string(Frequency f) { return f == Frequency::Daily ? "daily" : "weekly"; }

Frequency parse_frequency(std::string_view text) {
  if (text == "daily") return Frequency::Daily;
  if (text == "weekly") return Frequency::Weekly;
  throw Error(ErrorCode::ParseError, "unknown frequency '" + std::string(text) + "' (expected daily|weekly)");
}

std::int64_t parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw Error(ErrorCode::ParseError, "invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
  }
  using namespace std::chrono;
  const year_month_day ymd{year{parse_field(text.substr(0, 4), text)},
                           month{static_cast<unsigned>(parse_field(text.substr(5, 2), text))},
                           day{static_cast<unsigned>(parse_field(text.substr(8, 2), text))}};
  if (!ymd.ok()) throw Error(ErrorCode::ParseError, "invalid date '" + std::string(text) + "'");
  return sys_days{ymd}.time_since_epoch().count();
}

std::string format_iso_date(std::int64_t days) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

// 1970-01-01 was a Thursday; weeks start on Monday.
std::int64_t period_of_day(std::int64_t day, Frequency f) {
  return f == Frequency::Daily ? day : floor_div(day + 3, 7);
}

std::int64_t period_start_day(std::int64_t period, Frequency f) {
  return f == Frequency::Daily ? period : period * 7 - 3;
}

bool RateSeries::any_partial() const { return std::find(partial.begin(), partial.end(), true) != partial.end(); }

void RateSeries::validate() const {
  if (periods.size() != values.size() || partial.size() != values.size()) {
    throw Error(ErrorCode::InvalidParameter, "series field lengths differ");
  }
  for (std::size_t i = 1; i < periods.size(); ++i) {
    if (periods[i] <= periods[i - 1]) throw Error(ErrorCode::InvalidParameter, "series periods not strictly increasing");
  }
}

RateSeries resample(std::span<const std::int64_t> times, std::span<const double> values, Frequency f, Aggregation agg,
                    std::int64_t units_per_day) {
  if (times.empty()) throw Error(ErrorCode::EmptyInput, "resample of an empty series");
  if (times.size() != values.size()) throw Error(ErrorCode::InvalidParameter, "times and values differ in length");
  if (units_per_day <= 0) throw Error(ErrorCode::InvalidParameter, "units_per_day must be > 0");

  RateSeries out;
  out.frequency = f;
  const std::int64_t days_per_period = f == Frequency::Daily ? 1 : 7;
  std::size_t i = 0;
  while (i < times.size()) {
    if (i > 0 && times[i] < times[i - 1]) throw Error(ErrorCode::InvalidParameter, "times must be non-decreasing");
    const std::int64_t period = period_of_day(floor_div(times[i], units_per_day), f);
    double sum = 0.0;
    const double first = values[i];
    double last = 0.0;
    std::size_t n = 0;
    std::size_t j = i;
    for (; j < times.size(); ++j) {
      if (j > i && times[j] < times[j - 1]) throw Error(ErrorCode::InvalidParameter, "times must be non-decreasing");
      if (period_of_day(floor_div(times[j], units_per_day), f) != period) break;
      sum += values[j];
      last = values[j];
      ++n;
    }
    out.periods.push_back(period);
    switch (agg) {
      case Aggregation::Mean: out.values.push_back(sum / static_cast<double>(n)); break;
      case Aggregation::First: out.values.push_back(first); break;
      case Aggregation::Last: out.values.push_back(last); break;
    }
    out.partial.push_back(false);
    i = j;
  }
  const std::int64_t first_unit = period_start_day(out.periods.front(), f) * units_per_day;
  const std::int64_t last_unit = (period_start_day(out.periods.back(), f) + days_per_period) * units_per_day - 1;
  if (times.front() > first_unit) out.partial.front() = true;
  if (times.back() < last_unit) out.partial.back() = true;
  return out;
}

std::vector<RateSeries> align(std::span<const RateSeries> series) {
  std::vector<RateSeries> out(series.begin(), series.end());
  if (out.empty()) return out;
  std::map<std::int64_t, std::size_t> counts;
  for (const auto& s : series) {
    for (std::int64_t p : s.periods) ++counts[p];
  }
  for (auto& s : out) {
    RateSeries kept;
    kept.frequency = s.frequency;
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (counts[s.periods[k]] != series.size()) continue;
      kept.periods.push_back(s.periods[k]);
      kept.values.push_back(s.values[k]);
      kept.partial.push_back(s.partial[k]);
    }
    s = std::move(kept);
  }
  return out;
}

}  // namespace plf::econ
