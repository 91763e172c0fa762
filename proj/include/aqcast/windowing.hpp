#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aqcast/time_instant.hpp"
#include "aqcast/timeseries.hpp"

namespace aqcast {

enum class FeatureMode { multivariate, univariate };

const char* to_string(FeatureMode mode);

/// Supervised 3-D dataset cut from a frame by a sliding window: window i
/// reads input rows [s_i, s_i+N) and predicts PM2.5 at rows
/// [s_i+N, s_i+N+N_out). Immutable after construction; safe to share
/// read-only across parallel trials.
struct WindowedDataset {
  /// window_count x lookback x feature_count, row-major [window][step][feature]
  std::vector<double> inputs;
  /// window_count x horizon, row-major [window][step]
  std::vector<double> targets;
  /// Source-frame row index of each window's first input row.
  std::vector<std::size_t> window_start_indices;
  std::size_t lookback = 0;
  std::size_t horizon = 0;
  std::size_t feature_count = 0;
  std::vector<std::string> input_features;
  FeatureMode mode = FeatureMode::multivariate;

  std::size_t window_count() const { return window_start_indices.size(); }

  double input(std::size_t window, std::size_t step, std::size_t feature) const {
    return inputs[(window * lookback + step) * feature_count + feature];
  }
  double target(std::size_t window, std::size_t step) const {
    return targets[window * horizon + step];
  }
};

/// Builds the M = T - N - N_out + 1 sliding windows. In multivariate mode
/// the inputs are the 11 non-PM2.5 columns (or an explicit feature subset);
/// univariate mode uses PM2.5 alone. Targets are always PM2.5. The frame
/// must be fully imputed; T < N + N_out raises InsufficientDataError.
WindowedDataset build_windows(const TimeSeriesFrame& frame, std::size_t lookback,
                              std::size_t horizon, FeatureMode mode,
                              std::optional<std::vector<std::string>> input_features = {});

/// Dataset split and training strategy selector.
struct SeasonalMonths {
  int start_month;  // 1..12
  int end_month;    // 1..12, inclusive
};

enum class Strategy { plain, shuffled, seasonal };

const char* to_string(Strategy strategy);

struct SplitSpec {
  Instant train_end = 0;
  FeatureMode mode = FeatureMode::multivariate;
  Strategy strategy = Strategy::plain;
  std::optional<SeasonalMonths> seasonal_months;
  std::optional<std::uint64_t> shuffle_seed;

  /// shuffled requires shuffle_seed; seasonal requires seasonal_months.
  void validate() const;
};

/// A window is training iff its last target row's timestamp is strictly
/// before `boundary`; no window ever straddles both partitions. Either
/// partition coming out empty raises SplitError.
std::pair<WindowedDataset, WindowedDataset> chronological_split(
    const WindowedDataset& dataset, const TimeSeriesFrame& frame, Instant boundary);

/// First ceil(M/2) windows (in current order) become validation, the rest
/// test. Fewer than 2 windows raises SplitError.
std::pair<WindowedDataset, WindowedDataset> halve_for_validation(
    const WindowedDataset& holdout);

/// Seed-deterministic Fisher-Yates permutation of whole windows over
/// mt19937_64; each (input, target) pair stays intact.
WindowedDataset shuffle_windows(const WindowedDataset& dataset, std::uint64_t seed);

/// Debug dump: window_index,step,feature,value rows for test fixtures.
void dump_windows_csv(const WindowedDataset& dataset, std::ostream& out);

}  // namespace aqcast
