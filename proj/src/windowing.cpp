#include "aqcast/windowing.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <ostream>

#include "aqcast/errors.hpp"
#include "aqcast/rng.hpp"

namespace aqcast {

const char* to_string(FeatureMode mode) {
  return mode == FeatureMode::multivariate ? "multivariate" : "univariate";
}

const char* to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::plain: return "plain";
    case Strategy::shuffled: return "shuffled";
    case Strategy::seasonal: return "seasonal";
  }
  return "?";
}

void SplitSpec::validate() const {
  if (strategy == Strategy::shuffled && !shuffle_seed)
    throw ConfigError("split: shuffled strategy requires shuffle_seed");
  if (strategy == Strategy::seasonal) {
    if (!seasonal_months) throw ConfigError("split: seasonal strategy requires seasonal_months");
    if (seasonal_months->start_month < 1 || seasonal_months->start_month > 12 ||
        seasonal_months->end_month < 1 || seasonal_months->end_month > 12 ||
        seasonal_months->end_month < seasonal_months->start_month)
      throw ConfigError("split: seasonal_months out of range");
  }
}

WindowedDataset build_windows(const TimeSeriesFrame& frame, std::size_t lookback,
                              std::size_t horizon, FeatureMode mode,
                              std::optional<std::vector<std::string>> input_features) {
  if (lookback == 0 || horizon == 0)
    throw ShapeError("build_windows: lookback and horizon must be positive");
  if (frame.missing_count() > 0)
    throw RangeError("build_windows: frame has missing values; impute first");

  const std::size_t total = frame.row_count();
  if (total < lookback + horizon)
    throw InsufficientDataError("build_windows: need at least " +
                                std::to_string(lookback + horizon) + " rows, have " +
                                std::to_string(total));

  const std::size_t pm25 = frame.feature_index(kPm25);

  std::vector<std::string> features;
  if (input_features) {
    features = *input_features;
    if (features.empty()) throw ShapeError("build_windows: empty input feature set");
  } else if (mode == FeatureMode::univariate) {
    features = {kPm25};
  } else {
    for (const auto& name : frame.feature_names())
      if (name != kPm25) features.push_back(name);
  }
  std::vector<std::size_t> feature_cols;
  feature_cols.reserve(features.size());
  for (const auto& name : features) feature_cols.push_back(frame.feature_index(name));

  WindowedDataset ds;
  ds.lookback = lookback;
  ds.horizon = horizon;
  ds.feature_count = feature_cols.size();
  ds.input_features = std::move(features);
  ds.mode = mode;

  const std::size_t window_count = total - lookback - horizon + 1;
  ds.inputs.reserve(window_count * lookback * ds.feature_count);
  ds.targets.reserve(window_count * horizon);
  ds.window_start_indices.resize(window_count);

  for (std::size_t w = 0; w < window_count; ++w) {
    ds.window_start_indices[w] = w;
    for (std::size_t step = 0; step < lookback; ++step)
      for (std::size_t col : feature_cols) ds.inputs.push_back(frame.value(w + step, col));
    for (std::size_t step = 0; step < horizon; ++step)
      ds.targets.push_back(frame.value(w + lookback + step, pm25));
  }
  return ds;
}

namespace {

WindowedDataset select_windows(const WindowedDataset& src,
                               const std::vector<std::size_t>& positions) {
  WindowedDataset out;
  out.lookback = src.lookback;
  out.horizon = src.horizon;
  out.feature_count = src.feature_count;
  out.input_features = src.input_features;
  out.mode = src.mode;
  out.window_start_indices.reserve(positions.size());
  out.inputs.reserve(positions.size() * src.lookback * src.feature_count);
  out.targets.reserve(positions.size() * src.horizon);

  const std::size_t in_stride = src.lookback * src.feature_count;
  for (std::size_t pos : positions) {
    out.window_start_indices.push_back(src.window_start_indices[pos]);
    const double* in_begin = src.inputs.data() + pos * in_stride;
    out.inputs.insert(out.inputs.end(), in_begin, in_begin + in_stride);
    const double* tg_begin = src.targets.data() + pos * src.horizon;
    out.targets.insert(out.targets.end(), tg_begin, tg_begin + src.horizon);
  }
  return out;
}

}  // namespace

std::pair<WindowedDataset, WindowedDataset> chronological_split(
    const WindowedDataset& dataset, const TimeSeriesFrame& frame, Instant boundary) {
  std::vector<std::size_t> train_pos, holdout_pos;
  for (std::size_t pos = 0; pos < dataset.window_count(); ++pos) {
    const std::size_t start = dataset.window_start_indices[pos];
    const std::size_t last_target_row = start + dataset.lookback + dataset.horizon - 1;
    if (last_target_row >= frame.row_count())
      throw StateError("chronological_split: dataset does not belong to this frame");
    if (frame.timestamps()[last_target_row] < boundary)
      train_pos.push_back(pos);
    else
      holdout_pos.push_back(pos);
  }
  if (train_pos.empty())
    throw SplitError("chronological_split: empty training partition");
  if (holdout_pos.empty())
    throw SplitError("chronological_split: empty holdout partition");
  return {select_windows(dataset, train_pos), select_windows(dataset, holdout_pos)};
}

std::pair<WindowedDataset, WindowedDataset> halve_for_validation(
    const WindowedDataset& holdout) {
  const std::size_t m = holdout.window_count();
  if (m < 2) throw SplitError("halve_for_validation: need at least 2 windows");
  const std::size_t first_half = (m + 1) / 2;
  std::vector<std::size_t> val_pos(first_half), test_pos(m - first_half);
  std::iota(val_pos.begin(), val_pos.end(), 0);
  std::iota(test_pos.begin(), test_pos.end(), first_half);
  return {select_windows(holdout, val_pos), select_windows(holdout, test_pos)};
}

WindowedDataset shuffle_windows(const WindowedDataset& dataset, std::uint64_t seed) {
  std::vector<std::size_t> order(dataset.window_count());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(order[i - 1], order[j]);
  }
  return select_windows(dataset, order);
}

void dump_windows_csv(const WindowedDataset& dataset, std::ostream& out) {
  auto emit = [&out](std::size_t w, std::size_t step, const std::string& feature, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out << w << ',' << step << ',' << feature << ',' << std::string_view(buf, ptr) << '\n';
  };
  out << "window_index,step,feature,value\n";
  for (std::size_t w = 0; w < dataset.window_count(); ++w) {
    for (std::size_t step = 0; step < dataset.lookback; ++step)
      for (std::size_t f = 0; f < dataset.feature_count; ++f)
        emit(w, step, dataset.input_features[f], dataset.input(w, step, f));
    for (std::size_t step = 0; step < dataset.horizon; ++step)
      emit(w, dataset.lookback + step, "target", dataset.target(w, step));
  }
}

}  // namespace aqcast
