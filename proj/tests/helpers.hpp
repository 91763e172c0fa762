#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "aqcast/rng.hpp"
#include "aqcast/timeseries.hpp"
#include "aqcast/windowing.hpp"

namespace aqcast::testing {

/// Synthetic 12-feature frame at the station cadence, values in [0, 100).
inline TimeSeriesFrame make_frame(std::size_t rows, std::uint64_t seed = 1,
                                  Instant start = make_instant(2019, 1, 1)) {
  Rng rng(seed);
  std::vector<Instant> ts(rows);
  for (std::size_t i = 0; i < rows; ++i) ts[i] = start + static_cast<Instant>(i) * kCadence;
  std::vector<std::string> names(kStationColumns.begin(), kStationColumns.end());
  Matrix values(rows, names.size());
  for (std::size_t i = 0; i < values.size(); ++i) values.data()[i] = 100.0 * rng.next_double();
  return TimeSeriesFrame("synthetic", std::move(ts), std::move(names), std::move(values));
}

/// Frame whose PM2.5 column follows a smooth two-sine signal; the other
/// columns carry phase-shifted copies so multivariate inputs are informative.
inline TimeSeriesFrame make_wave_frame(std::size_t rows, double noise = 0.0,
                                       std::uint64_t seed = 1) {
  Rng rng(seed);
  std::vector<Instant> ts(rows);
  for (std::size_t i = 0; i < rows; ++i)
    ts[i] = make_instant(2019, 1, 1) + static_cast<Instant>(i) * kCadence;
  std::vector<std::string> names(kStationColumns.begin(), kStationColumns.end());
  Matrix values(rows, names.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double x = static_cast<double>(r);
    const double base = std::sin(2.0 * M_PI * x / 24.0) + 0.5 * std::sin(2.0 * M_PI * x / 7.0);
    for (std::size_t f = 0; f < names.size(); ++f) {
      const double phase = 0.3 * static_cast<double>(f);
      double v = std::sin(2.0 * M_PI * x / 24.0 + phase) +
                 0.5 * std::sin(2.0 * M_PI * x / 7.0 + phase);
      if (names[f] == kPm25) v = base;
      if (noise > 0.0) v += noise * (rng.next_double() - 0.5);
      values(r, f) = 50.0 + 20.0 * v;
    }
  }
  return TimeSeriesFrame("wave", std::move(ts), std::move(names), std::move(values));
}

/// Canonical CSV text for a frame (via the library writer).
inline std::string frame_to_csv(const TimeSeriesFrame& frame) {
  std::ostringstream out;
  write_station_csv(frame, out);
  return out.str();
}

/// 3 data rows, all columns populated, toy values.
inline std::string tiny_csv() {
  return "timestamp,PM10,Benzene,Toluene,NH3,NO,NO2,NOx,WS,Ozone,SO2,CO,PM2.5\n"
         "2020-01-01T00:00,1,2,3,4,5,6,7,8,9,10,11,12\n"
         "2020-01-01T08:00,2,3,4,5,6,7,8,9,10,11,12,13\n"
         "2020-01-01T16:00,3,4,5,6,7,8,9,10,11,12,13,14\n";
}

}  // namespace aqcast::testing
