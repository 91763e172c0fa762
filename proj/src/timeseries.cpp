#include "aqcast/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "aqcast/errors.hpp"

namespace aqcast {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  cells.push_back(cell);
  return cells;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

double parse_cell(const std::string& raw, std::size_t data_row) {
  const std::string cell = trim(raw);
  if (cell.empty() || cell == "NA") return kMissing;
  double value = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw ParseError("row " + std::to_string(data_row) + ": cannot parse value '" + cell + "'");
  return value;
}

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

double median_of(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

TimeSeriesFrame::TimeSeriesFrame(std::string station, std::vector<Instant> timestamps,
                                 std::vector<std::string> feature_names, Matrix values)
    : station_(std::move(station)),
      timestamps_(std::move(timestamps)),
      feature_names_(std::move(feature_names)),
      values_(std::move(values)) {
  if (values_.rows() != timestamps_.size() || values_.cols() != feature_names_.size())
    throw ShapeError("frame: values shape does not match timestamps/features");
  for (std::size_t i = 1; i < timestamps_.size(); ++i)
    if (timestamps_[i] <= timestamps_[i - 1])
      throw OrderingError("frame: timestamps not strictly increasing at row " +
                          std::to_string(i + 1));
  std::set<std::string> seen;
  for (const auto& name : feature_names_)
    if (!seen.insert(name).second)
      throw SchemaError("frame: duplicate feature name '" + name + "'");
}

bool TimeSeriesFrame::is_missing(std::size_t row, std::size_t feature) const {
  return std::isnan(values_(row, feature));
}

std::size_t TimeSeriesFrame::missing_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (std::isnan(values_.data()[i])) ++n;
  return n;
}

std::size_t TimeSeriesFrame::feature_index(const std::string& name) const {
  for (std::size_t i = 0; i < feature_names_.size(); ++i)
    if (feature_names_[i] == name) return i;
  throw SchemaError("unknown feature '" + name + "'");
}

std::vector<double> TimeSeriesFrame::column(std::size_t feature) const {
  std::vector<double> out(row_count());
  for (std::size_t r = 0; r < row_count(); ++r) out[r] = values_(r, feature);
  return out;
}

TimeSeriesFrame parse_station_csv(std::istream& in, const std::string& station) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty input: missing header");

  const auto header = split_csv_line(line);
  std::vector<std::string> expected = {"timestamp"};
  for (const char* c : kStationColumns) expected.emplace_back(c);

  if (header != expected) {
    // Name what is wrong: a missing expected column first, then an extra one.
    std::set<std::string> got(header.begin(), header.end());
    for (const auto& col : expected)
      if (!got.count(col)) throw SchemaError("header: missing column '" + col + "'");
    std::set<std::string> want(expected.begin(), expected.end());
    for (const auto& col : header)
      if (!want.count(col)) throw SchemaError("header: unexpected column '" + col + "'");
    throw SchemaError("header: columns out of order");
  }

  std::vector<Instant> timestamps;
  std::vector<double> flat;
  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++data_row;
    const auto cells = split_csv_line(line);
    if (cells.size() != expected.size())
      throw ParseError("row " + std::to_string(data_row) + ": expected " +
                       std::to_string(expected.size()) + " cells, got " +
                       std::to_string(cells.size()));
    Instant t;
    try {
      t = parse_instant(trim(cells[0]));
    } catch (const ParseError& e) {
      throw ParseError("row " + std::to_string(data_row) + ": " + e.what());
    }
    if (!timestamps.empty() && t <= timestamps.back())
      throw OrderingError("row " + std::to_string(data_row) +
                          ": timestamp not increasing (" + format_instant(t) + ")");
    timestamps.push_back(t);
    for (std::size_t c = 1; c < cells.size(); ++c)
      flat.push_back(parse_cell(cells[c], data_row));
  }

  Matrix values(timestamps.size(), kStationColumns.size());
  std::copy(flat.begin(), flat.end(), values.data());
  std::vector<std::string> names(kStationColumns.begin(), kStationColumns.end());
  return TimeSeriesFrame(station, std::move(timestamps), std::move(names), std::move(values));
}

void write_station_csv(const TimeSeriesFrame& frame, std::ostream& out) {
  std::string line = "timestamp";
  for (const auto& name : frame.feature_names()) {
    line += ',';
    line += name;
  }
  line += '\n';
  out << line;

  for (std::size_t r = 0; r < frame.row_count(); ++r) {
    line = format_instant(frame.timestamps()[r]);
    for (std::size_t c = 0; c < frame.feature_count(); ++c) {
      line += ',';
      if (!frame.is_missing(r, c)) append_double(line, frame.value(r, c));
    }
    line += '\n';
    out << line;
  }
}

TimeSeriesFrame impute_neighbor_median(const TimeSeriesFrame& frame, int k) {
  if (k < 1) throw RangeError("impute: k must be >= 1");
  const std::size_t rows = frame.row_count();
  const std::size_t cols = frame.feature_count();
  Matrix out = frame.values();

  for (std::size_t f = 0; f < cols; ++f) {
    for (std::size_t t = 0; t < rows; ++t) {
      if (!frame.is_missing(t, f)) continue;
      std::vector<double> neighbors;
      const std::size_t lo = t >= static_cast<std::size_t>(k) ? t - k : 0;
      const std::size_t hi = std::min(rows - 1, t + static_cast<std::size_t>(k));
      for (std::size_t r = lo; r <= hi; ++r) {
        if (r == t) continue;
        if (!frame.is_missing(r, f)) neighbors.push_back(frame.value(r, f));
      }
      if (neighbors.empty())
        throw ImputationError("impute: no available neighbors for row " + std::to_string(t) +
                              ", feature '" + frame.feature_names()[f] + "'");
      out(t, f) = median_of(neighbors);
    }
  }
  return TimeSeriesFrame(frame.station(), frame.timestamps(), frame.feature_names(),
                         std::move(out));
}

std::size_t ScalerParams::feature_index(const std::string& name) const {
  for (std::size_t i = 0; i < feature_names.size(); ++i)
    if (feature_names[i] == name) return i;
  throw SchemaError("scaler: unknown feature '" + name + "'");
}

double ScalerParams::scale_value(std::size_t feature, double x) const {
  const double lo = minimum[feature];
  const double hi = maximum[feature];
  if (hi == lo) return 0.0;
  return (x - lo) / (hi - lo);
}

double ScalerParams::invert_value(std::size_t feature, double x) const {
  const double lo = minimum[feature];
  const double hi = maximum[feature];
  return x * (hi - lo) + lo;
}

ScalerParams minmax_fit(const TimeSeriesFrame& frame) {
  if (frame.missing_count() > 0) throw RangeError("minmax_fit: frame has missing values");
  if (frame.row_count() == 0) throw InsufficientDataError("minmax_fit: empty frame");
  ScalerParams s;
  s.feature_names = frame.feature_names();
  s.minimum.resize(frame.feature_count());
  s.maximum.resize(frame.feature_count());
  for (std::size_t f = 0; f < frame.feature_count(); ++f) {
    double lo = frame.value(0, f), hi = frame.value(0, f);
    for (std::size_t r = 1; r < frame.row_count(); ++r) {
      lo = std::min(lo, frame.value(r, f));
      hi = std::max(hi, frame.value(r, f));
    }
    s.minimum[f] = lo;
    s.maximum[f] = hi;
  }
  return s;
}

namespace {

TimeSeriesFrame scaler_map(const TimeSeriesFrame& frame, const ScalerParams& scaler,
                           bool invert) {
  if (frame.missing_count() > 0) throw RangeError("scaler: frame has missing values");
  if (frame.feature_names() != scaler.feature_names)
    throw SchemaError("scaler: feature set does not match frame");
  Matrix out(frame.row_count(), frame.feature_count());
  for (std::size_t r = 0; r < frame.row_count(); ++r)
    for (std::size_t f = 0; f < frame.feature_count(); ++f)
      out(r, f) = invert ? scaler.invert_value(f, frame.value(r, f))
                         : scaler.scale_value(f, frame.value(r, f));
  return TimeSeriesFrame(frame.station(), frame.timestamps(), frame.feature_names(),
                         std::move(out));
}

}  // namespace

TimeSeriesFrame minmax_apply(const TimeSeriesFrame& frame, const ScalerParams& scaler) {
  return scaler_map(frame, scaler, false);
}

TimeSeriesFrame minmax_invert(const TimeSeriesFrame& frame, const ScalerParams& scaler) {
  return scaler_map(frame, scaler, true);
}

CorrelationMatrix pearson_matrix(const TimeSeriesFrame& frame) {
  if (frame.missing_count() > 0) throw RangeError("pearson: frame has missing values");
  const std::size_t n = frame.row_count();
  const std::size_t f_count = frame.feature_count();
  if (n < 2) throw InsufficientDataError("pearson: need at least 2 rows");

  std::vector<double> means(f_count, 0.0);
  for (std::size_t f = 0; f < f_count; ++f) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) sum += frame.value(r, f);
    means[f] = sum / static_cast<double>(n);
  }
  std::vector<double> sq(f_count, 0.0);
  for (std::size_t f = 0; f < f_count; ++f) {
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = frame.value(r, f) - means[f];
      s += d * d;
    }
    sq[f] = s;
  }

  CorrelationMatrix cm;
  cm.feature_names = frame.feature_names();
  cm.coefficients = Matrix(f_count, f_count);
  cm.defined.assign(f_count * f_count, 1);

  for (std::size_t i = 0; i < f_count; ++i) {
    for (std::size_t j = i; j < f_count; ++j) {
      double value = 0.0;
      bool defined = sq[i] > 0.0 && sq[j] > 0.0;
      if (defined) {
        if (i == j) {
          value = 1.0;
        } else {
          double cov = 0.0;
          for (std::size_t r = 0; r < n; ++r)
            cov += (frame.value(r, i) - means[i]) * (frame.value(r, j) - means[j]);
          value = cov / std::sqrt(sq[i] * sq[j]);
          value = std::clamp(value, -1.0, 1.0);
        }
      }
      cm.coefficients(i, j) = value;
      cm.coefficients(j, i) = value;
      cm.defined[i * f_count + j] = defined ? 1 : 0;
      cm.defined[j * f_count + i] = defined ? 1 : 0;
    }
  }
  return cm;
}

PeriodSummary period_stats(const TimeSeriesFrame& frame, const std::string& feature,
                           Instant start, Instant end) {
  const std::size_t f = frame.feature_index(feature);
  std::vector<double> samples;
  for (std::size_t r = 0; r < frame.row_count(); ++r) {
    const Instant t = frame.timestamps()[r];
    if (t < start || t > end) continue;
    if (frame.is_missing(r, f)) continue;
    samples.push_back(frame.value(r, f));
  }
  if (samples.empty())
    throw RangeError("period_stats: no samples for '" + feature + "' in [" +
                     format_instant(start) + ", " + format_instant(end) + "]");

  const std::size_t n = samples.size();
  double sum = 0.0;
  for (double v : samples) sum += v;
  const double mean = sum / static_cast<double>(n);
  double half = 0.0;
  if (n > 1) {
    double sq = 0.0;
    for (double v : samples) sq += (v - mean) * (v - mean);
    const double s = std::sqrt(sq / static_cast<double>(n - 1));
    half = 1.96 * s / std::sqrt(static_cast<double>(n));
  }
  return PeriodSummary{feature, start, end, mean, half, n};
}

TimeSeriesFrame seasonal_slice(const TimeSeriesFrame& frame, Instant start, Instant end) {
  if (start >= end) throw RangeError("seasonal_slice: start must be before end");
  std::size_t first = frame.row_count(), last = 0;
  for (std::size_t r = 0; r < frame.row_count(); ++r) {
    const Instant t = frame.timestamps()[r];
    if (t >= start && t < end) {
      first = std::min(first, r);
      last = std::max(last, r + 1);
    }
  }
  if (first >= last)
    throw RangeError("seasonal_slice: empty slice [" + format_instant(start) + ", " +
                     format_instant(end) + ")");

  const std::size_t rows = last - first;
  std::vector<Instant> ts(frame.timestamps().begin() + static_cast<std::ptrdiff_t>(first),
                          frame.timestamps().begin() + static_cast<std::ptrdiff_t>(last));
  Matrix values(rows, frame.feature_count());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t f = 0; f < frame.feature_count(); ++f)
      values(r, f) = frame.value(first + r, f);
  return TimeSeriesFrame(frame.station(), std::move(ts), frame.feature_names(),
                         std::move(values));
}

}  // namespace aqcast
