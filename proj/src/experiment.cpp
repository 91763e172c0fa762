#include "aqcast/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "aqcast/errors.hpp"

namespace aqcast {

void TrainingConfig::validate() const {
  if (batch_size == 0) throw ConfigError("config: batch_size must be >= 1");
  if (trials == 0) throw ConfigError("config: trials must be >= 1");
  split.validate();
}

namespace {

// First instant of a month, rolling over past December.
Instant month_start(int year, int month) {
  if (month > 12) {
    year += (month - 1) / 12;
    month = (month - 1) % 12 + 1;
  }
  return make_instant(year, month, 1);
}

std::vector<double> scaled_pm25_tail(const TimeSeriesFrame& scaled, std::size_t lookback) {
  const std::size_t pm25 = scaled.feature_index(kPm25);
  const std::size_t rows = scaled.row_count();
  std::vector<double> tail;
  tail.reserve(lookback);
  for (std::size_t r = rows - lookback; r < rows; ++r) tail.push_back(scaled.value(r, pm25));
  return tail;
}

}  // namespace

DataBundle prepare_bundle(const TimeSeriesFrame& imputed, std::size_t lookback,
                          std::size_t horizon, const SplitSpec& split) {
  split.validate();
  if (imputed.missing_count() > 0)
    throw RangeError("prepare_bundle: frame has missing values; impute first");
  if (imputed.row_count() < lookback + horizon)
    throw InsufficientDataError("prepare_bundle: frame too short for one window");

  DataBundle bundle;

  if (split.strategy == Strategy::seasonal) {
    const int test_year = civil_from_instant(split.train_end).year;
    const int train_year = test_year - 1;
    const SeasonalMonths months = *split.seasonal_months;

    const TimeSeriesFrame train_slice =
        seasonal_slice(imputed, month_start(train_year, months.start_month),
                       month_start(train_year, months.end_month + 1));
    const TimeSeriesFrame test_slice =
        seasonal_slice(imputed, month_start(test_year, months.start_month),
                       month_start(test_year, months.end_month + 1));

    bundle.scaler = minmax_fit(train_slice);
    const TimeSeriesFrame train_scaled = minmax_apply(train_slice, bundle.scaler);
    const TimeSeriesFrame test_scaled = minmax_apply(test_slice, bundle.scaler);

    bundle.train = build_windows(train_scaled, lookback, horizon, split.mode);
    const WindowedDataset holdout = build_windows(test_scaled, lookback, horizon, split.mode);
    std::tie(bundle.validation, bundle.test) = halve_for_validation(holdout);

    bundle.seed_window_scaled = scaled_pm25_tail(test_scaled, lookback);
    bundle.forecast_start = test_scaled.timestamps().back() + kCadence;
  } else {
    // Scaler fitted on the training period only and reused downstream.
    const TimeSeriesFrame train_rows =
        seasonal_slice(imputed, imputed.timestamps().front(), split.train_end);
    bundle.scaler = minmax_fit(train_rows);
    const TimeSeriesFrame scaled = minmax_apply(imputed, bundle.scaler);

    const WindowedDataset all = build_windows(scaled, lookback, horizon, split.mode);
    auto [train, holdout] = chronological_split(all, scaled, split.train_end);
    if (split.strategy == Strategy::shuffled)
      train = shuffle_windows(train, *split.shuffle_seed);
    bundle.train = std::move(train);
    std::tie(bundle.validation, bundle.test) = halve_for_validation(holdout);

    bundle.seed_window_scaled = scaled_pm25_tail(scaled, lookback);
    bundle.forecast_start = scaled.timestamps().back() + kCadence;
  }
  return bundle;
}

int trial_thread_budget() {
  if (const char* env = std::getenv("AQCAST_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

Matrix denormalized_targets(const WindowedDataset& ds, const ScalerParams& scaler) {
  Matrix t(ds.window_count(), ds.horizon);
  const std::size_t pm25 = scaler.feature_index(kPm25);
  for (std::size_t w = 0; w < ds.window_count(); ++w)
    for (std::size_t h = 0; h < ds.horizon; ++h)
      t(w, h) = scaler.invert_value(pm25, ds.target(w, h));
  return t;
}

HorizonMetrics evaluate_split(const TrainedModel& model, const WindowedDataset& ds,
                              const char* label) {
  const Predictions pred = predict_batch(model, ds);
  const Matrix targets = denormalized_targets(ds, model.scaler);
  HorizonMetrics m = horizon_rmse(pred.denormalized, targets);
  m.dataset_label = label;
  return m;
}

MetricStat stat_from_samples(const std::vector<double>& samples) {
  const ConfidenceInterval ci = confidence_interval(samples);
  return {ci.mean, ci.half_width_95};
}

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

ExperimentSummary run_trials(const DataBundle& bundle, const ModelSpec& spec,
                             const TrainingConfig& config) {
  config.validate();
  spec.validate();
  if (bundle.train.feature_count != spec.input_features)
    throw ShapeError("run_trials: bundle feature count does not match spec");

  const std::size_t trials = config.trials;
  std::vector<TrialOutcome> outcomes(trials);

  TrainOptions opt{config.epochs, config.batch_size, config.adam};

  // Trials are embarrassingly parallel; outcomes land in per-trial slots so
  // the aggregation below is identical for serial and parallel execution.
  // Exceptions must not cross the omp region: divergence is recorded per
  // trial, anything else is stashed and rethrown afterwards.
  std::string trial_error;
  const int threads = std::min<int>(trial_thread_budget(), static_cast<int>(trials));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (long long k = 0; k < static_cast<long long>(trials); ++k) {
    TrialOutcome& outcome = outcomes[static_cast<std::size_t>(k)];
    outcome.seed = config.base_seed + static_cast<std::uint64_t>(k);
    try {
      TrainedModel model = build_model(spec, outcome.seed);
      model.scaler = bundle.scaler;
      train(model, bundle.train, opt);
      outcome.loss_history = model.loss_history;
      outcome.train = evaluate_split(model, bundle.train, "train");
      outcome.validation = evaluate_split(model, bundle.validation, "validation");
      outcome.test = evaluate_split(model, bundle.test, "test");
    } catch (const DivergenceError& e) {
      outcome.diverged = true;
      outcome.diverged_epoch = e.epoch;
    } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
      if (trial_error.empty()) trial_error = e.what();
    }
  }
  if (!trial_error.empty()) throw Error("run_trials: " + trial_error);

  return summarize_trials(std::move(outcomes), spec, config, bundle.train.horizon);
}

ExperimentSummary summarize_trials(std::vector<TrialOutcome> outcomes, const ModelSpec& spec,
                                   const TrainingConfig& config, std::size_t horizon) {
  ExperimentSummary summary;
  summary.spec = spec;
  summary.config = config;
  summary.trials = std::move(outcomes);
  for (const TrialOutcome& o : summary.trials)
    if (o.diverged)
      ++summary.diverged_count;
    else
      ++summary.trial_count;
  if (summary.trial_count == 0)
    throw DivergenceError("run_trials: every trial diverged", 0);

  auto aggregate = [&](auto metric_of) {
    DatasetStats stats;
    std::vector<double> overall;
    for (const TrialOutcome& o : summary.trials)
      if (!o.diverged) overall.push_back(metric_of(o).overall_rmse);
    stats.overall = stat_from_samples(overall);

    stats.per_horizon.resize(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
      std::vector<double> samples;
      for (const TrialOutcome& o : summary.trials)
        if (!o.diverged) samples.push_back(metric_of(o).per_horizon_rmse[h]);
      stats.per_horizon[h] = stat_from_samples(samples);
    }
    return stats;
  };

  summary.train = aggregate([](const TrialOutcome& o) -> const HorizonMetrics& { return o.train; });
  summary.validation =
      aggregate([](const TrialOutcome& o) -> const HorizonMetrics& { return o.validation; });
  summary.test = aggregate([](const TrialOutcome& o) -> const HorizonMetrics& { return o.test; });
  return summary;
}

// --- closed-loop forecasting --------------------------------------------------

std::vector<double> closed_loop_forecast(const ForecastStepFn& step_fn,
                                         std::span<const double> seed_window,
                                         std::size_t steps, std::size_t horizon) {
  if (steps == 0) throw RangeError("forecast: steps must be >= 1");
  if (horizon == 0) throw RangeError("forecast: horizon must be >= 1");
  if (seed_window.empty()) throw RangeError("forecast: empty seed window");

  std::vector<double> history(seed_window.begin(), seed_window.end());
  const std::size_t lookback = seed_window.size();
  std::vector<double> out;
  out.reserve(steps);

  while (out.size() < steps) {
    const std::span<const double> window(history.data() + history.size() - lookback, lookback);
    const std::vector<double> block = step_fn(window);
    if (block.size() != horizon)
      throw ShapeError("forecast: step produced " + std::to_string(block.size()) +
                       " values, expected " + std::to_string(horizon));
    for (double v : block) {
      history.push_back(v);
      if (out.size() < steps) out.push_back(v);
    }
  }
  return out;
}

namespace {

std::vector<Instant> forecast_timestamps(Instant start, std::size_t steps) {
  std::vector<Instant> ts(steps);
  for (std::size_t i = 0; i < steps; ++i) ts[i] = start + static_cast<Instant>(i) * kCadence;
  return ts;
}

std::vector<double> model_trajectory(const TrainedModel& model,
                                     std::span<const double> seed_window_scaled,
                                     std::size_t steps) {
  if (model.spec.input_features != 1)
    throw ConfigError("forecast: closed-loop feedback needs a univariate model");
  if (seed_window_scaled.size() != model.spec.lookback)
    throw ShapeError("forecast: seed window must hold the latest " +
                     std::to_string(model.spec.lookback) + " values");

  const auto step_fn = [&model](std::span<const double> window) {
    std::vector<Matrix> steps_in;
    steps_in.reserve(window.size());
    for (double v : window) {
      Matrix m(1, 1);
      m(0, 0) = v;
      steps_in.push_back(std::move(m));
    }
    const Matrix y = model.net->forward(steps_in, nullptr);
    std::vector<double> block(y.cols());
    for (std::size_t h = 0; h < y.cols(); ++h) block[h] = y(0, h);
    return block;
  };

  std::vector<double> scaled =
      closed_loop_forecast(step_fn, seed_window_scaled, steps, model.spec.horizon);

  if (!model.scaler.feature_names.empty()) {
    const std::size_t pm25 = model.scaler.feature_index(kPm25);
    for (double& v : scaled) v = model.scaler.invert_value(pm25, v);
  }
  return scaled;
}

}  // namespace

ForecastResult recursive_forecast(const TrainedModel& model,
                                  std::span<const double> seed_window_scaled,
                                  std::size_t steps, Instant start) {
  ForecastResult result;
  result.trajectories.push_back(model_trajectory(model, seed_window_scaled, steps));
  result.mean = result.trajectories.front();
  result.half_width_95.assign(steps, 0.0);
  result.timestamps = forecast_timestamps(start, steps);
  return result;
}

ForecastResult forecast_with_uncertainty(std::span<const TrainedModel> models,
                                         std::span<const double> seed_window_scaled,
                                         std::size_t steps, Instant start) {
  if (models.empty()) throw ConfigError("forecast: need at least one trained model");
  for (const TrainedModel& m : models)
    if (!(m.spec == models.front().spec))
      throw ConfigError("forecast: all models must share one spec");

  ForecastResult result;
  result.trajectories.reserve(models.size());
  for (const TrainedModel& m : models)
    result.trajectories.push_back(model_trajectory(m, seed_window_scaled, steps));

  result.mean.resize(steps);
  result.half_width_95.resize(steps);
  std::vector<double> samples(models.size());
  for (std::size_t i = 0; i < steps; ++i) {
    for (std::size_t t = 0; t < models.size(); ++t) samples[t] = result.trajectories[t][i];
    const ConfidenceInterval ci = confidence_interval(samples);
    result.mean[i] = ci.mean;
    result.half_width_95[i] = ci.half_width_95;
  }
  result.timestamps = forecast_timestamps(start, steps);
  return result;
}

// --- writers ------------------------------------------------------------------

void write_summary_csv(const ExperimentSummary& summary, std::ostream& out) {
  std::string line = "metric,mean,half_width_95\n";
  auto emit = [&line](const std::string& name, const MetricStat& s) {
    line += name;
    line += ',';
    append_double(line, s.mean);
    line += ',';
    append_double(line, s.half_width);
    line += '\n';
  };
  emit("Train", summary.train.overall);
  emit("Test", summary.test.overall);
  for (std::size_t h = 0; h < summary.test.per_horizon.size(); ++h)
    emit("Step-" + std::to_string(h + 1), summary.test.per_horizon[h]);
  out << line;
}

void write_loss_curves_csv(const ExperimentSummary& summary, std::ostream& out) {
  std::string line = "trial,epoch,loss\n";
  for (std::size_t k = 0; k < summary.trials.size(); ++k) {
    const TrialOutcome& o = summary.trials[k];
    if (o.diverged) continue;
    for (std::size_t e = 0; e < o.loss_history.size(); ++e) {
      line += std::to_string(k);
      line += ',';
      line += std::to_string(e);
      line += ',';
      append_double(line, o.loss_history[e]);
      line += '\n';
    }
  }
  out << line;
}

void write_forecast_csv(const ForecastResult& forecast, std::ostream& out) {
  std::string line = "timestamp,mean,lower95,upper95\n";
  for (std::size_t i = 0; i < forecast.timestamps.size(); ++i) {
    line += format_instant(forecast.timestamps[i]);
    line += ',';
    append_double(line, forecast.mean[i]);
    line += ',';
    append_double(line, forecast.mean[i] - forecast.half_width_95[i]);
    line += ',';
    append_double(line, forecast.mean[i] + forecast.half_width_95[i]);
    line += '\n';
  }
  out << line;
}

}  // namespace aqcast
