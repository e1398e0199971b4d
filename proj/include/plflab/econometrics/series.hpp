#pragma once

// Time series on a daily or weekly period index, and resampling from finer
// observations (per block or per day).

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace plf::econ {

enum class Frequency { Daily, Weekly };

std::string_view to_string(Frequency f);
Frequency parse_frequency(std::string_view text);

/// Days since 1970-01-01 for an ISO-8601 date "YYYY-MM-DD".
std::int64_t parse_iso_date(std::string_view text);
std::string format_iso_date(std::int64_t days);

/// Period index of a day: the day itself, or the Monday-aligned week number.
std::int64_t period_of_day(std::int64_t day, Frequency f);
/// First day of a period.
std::int64_t period_start_day(std::int64_t period, Frequency f);

struct RateSeries {
  Frequency frequency = Frequency::Daily;
  std::vector<std::int64_t> periods;  // strictly increasing
  std::vector<double> values;
  std::vector<bool> partial;  // first/last period not fully covered by observations

  std::size_t size() const { return values.size(); }
  bool any_partial() const;
  void validate() const;
};

enum class Aggregation { Mean, First, Last };

/// Buckets observations at `times` (in units, `units_per_day` per day, unit 0
/// at day 0) into periods: the mean, the first or the last observation of
/// each period. Times must be non-decreasing.
RateSeries resample(std::span<const std::int64_t> times, std::span<const double> values, Frequency f,
                    Aggregation agg = Aggregation::Mean, std::int64_t units_per_day = 1);

/// Restricts every series to the periods present in all of them.
std::vector<RateSeries> align(std::span<const RateSeries> series);

}  // namespace plf::econ
