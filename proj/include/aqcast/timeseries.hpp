#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aqcast/matrix.hpp"
#include "aqcast/time_instant.hpp"

namespace aqcast {

/// Station CSV schema, in column order after the leading timestamp.
inline constexpr std::array<const char*, 12> kStationColumns = {
    "PM10", "Benzene", "Toluene", "NH3", "NO", "NO2",
    "NOx",  "WS",      "Ozone",   "SO2", "CO", "PM2.5"};

inline constexpr const char* kPm25 = "PM2.5";

/// Timestamped multivariate pollutant series for one monitoring station.
/// Missing entries are NaN until imputation. Immutable after construction;
/// every operation returns a new frame, so frames are safe to share
/// read-only across concurrent trials.
class TimeSeriesFrame {
 public:
  TimeSeriesFrame(std::string station, std::vector<Instant> timestamps,
                  std::vector<std::string> feature_names, Matrix values);

  const std::string& station() const { return station_; }
  const std::vector<Instant>& timestamps() const { return timestamps_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const Matrix& values() const { return values_; }

  std::size_t row_count() const { return timestamps_.size(); }
  std::size_t feature_count() const { return feature_names_.size(); }

  double value(std::size_t row, std::size_t feature) const { return values_(row, feature); }
  bool is_missing(std::size_t row, std::size_t feature) const;
  std::size_t missing_count() const;

  /// Index of a feature by name; throws SchemaError if absent.
  std::size_t feature_index(const std::string& name) const;

  std::vector<double> column(std::size_t feature) const;

 private:
  std::string station_;
  std::vector<Instant> timestamps_;
  std::vector<std::string> feature_names_;
  Matrix values_;  // row_count x feature_count; NaN marks missing
};

/// Parses a station export. Header must be exactly
/// `timestamp,PM10,...,PM2.5`; missing cells are empty or `NA`.
/// Errors: SchemaError naming the missing/extra column, ParseError with the
/// 1-based data-row number, OrderingError on non-increasing timestamps.
TimeSeriesFrame parse_station_csv(std::istream& in, const std::string& station);

/// Canonical serialization: the schema header, `YYYY-MM-DDTHH:MM`
/// timestamps, shortest round-trip numbers, empty cells for missing.
/// parse(serialize(frame)) == frame.
void write_station_csv(const TimeSeriesFrame& frame, std::ostream& out);

/// Replaces every missing value with the median of the available
/// pre-imputation values within k rows on each side (the entry itself
/// excluded). A missing entry with zero available neighbors raises
/// ImputationError naming (row, feature). Non-missing values pass through
/// untouched, and the result does not depend on processing order.
TimeSeriesFrame impute_neighbor_median(const TimeSeriesFrame& frame, int k = 2);

/// Per-feature min/max fitted on one frame (by convention the training
/// rows only) and reused everywhere downstream.
struct ScalerParams {
  std::vector<std::string> feature_names;
  std::vector<double> minimum;
  std::vector<double> maximum;

  std::size_t feature_index(const std::string& name) const;
  /// (x - min) / (max - min); constant features map to 0.
  double scale_value(std::size_t feature, double x) const;
  /// x * (max - min) + min
  double invert_value(std::size_t feature, double x) const;
};

ScalerParams minmax_fit(const TimeSeriesFrame& frame);
TimeSeriesFrame minmax_apply(const TimeSeriesFrame& frame, const ScalerParams& scaler);
TimeSeriesFrame minmax_invert(const TimeSeriesFrame& frame, const ScalerParams& scaler);

/// Pearson product-moment coefficients for every feature pair. Pairs
/// involving a zero-variance feature are reported as 0 with defined=false
/// rather than NaN.
struct CorrelationMatrix {
  std::vector<std::string> feature_names;
  Matrix coefficients;                // F x F
  std::vector<std::uint8_t> defined;  // F x F, row-major

  bool is_defined(std::size_t i, std::size_t j) const {
    return defined[i * feature_names.size() + j] != 0;
  }
};

CorrelationMatrix pearson_matrix(const TimeSeriesFrame& frame);

/// Mean and normal-approximation 95% confidence half-width of one feature
/// over a period.
struct PeriodSummary {
  std::string feature;
  Instant start;
  Instant end;
  double mean;
  double half_width_95;
  std::size_t sample_count;
};

/// Samples with start <= t <= end (inclusive both ends, per the stats
/// contract). half_width_95 = 1.96 * s / sqrt(n) with the (n-1)-denominator
/// sample standard deviation; n = 1 gives 0.
PeriodSummary period_stats(const TimeSeriesFrame& frame, const std::string& feature,
                           Instant start, Instant end);

/// Rows with start <= t < end (half-open). Empty result raises RangeError.
TimeSeriesFrame seasonal_slice(const TimeSeriesFrame& frame, Instant start, Instant end);

}  // namespace aqcast
