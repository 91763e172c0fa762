#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "aqcast/metrics.hpp"
#include "aqcast/model.hpp"
#include "aqcast/timeseries.hpp"
#include "aqcast/windowing.hpp"

namespace aqcast {

/// Full recipe for one experiment cell: optimizer, schedule, trial count
/// and the split strategy.
struct TrainingConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 20;
  AdamHyper adam;
  std::size_t trials = 30;
  std::uint64_t base_seed = 1;
  SplitSpec split;

  void validate() const;
};

/// Train/validation/test windows plus the scaler that produced them.
/// Prepared once per experiment cell and shared read-only by all trials.
struct DataBundle {
  WindowedDataset train;
  WindowedDataset validation;
  WindowedDataset test;
  ScalerParams scaler;
  /// Latest `lookback` PM2.5 values (scaled), the closed-loop seed window.
  std::vector<double> seed_window_scaled;
  /// First future instant, one cadence after the last observation.
  Instant forecast_start = 0;
};

/// Builds the bundle for a split spec. Plain/shuffled: scaler fit on rows
/// before train_end, windows split there, train optionally shuffled.
/// Seasonal: train windows from seasonal_months of the year before
/// train_end's year, holdout from the same months of train_end's year.
/// The holdout is always halved chronologically into validation|test.
DataBundle prepare_bundle(const TimeSeriesFrame& imputed, std::size_t lookback,
                          std::size_t horizon, const SplitSpec& split);

struct TrialOutcome {
  std::uint64_t seed = 0;
  bool diverged = false;
  std::size_t diverged_epoch = 0;
  HorizonMetrics train;       // denormalized PM2.5 units
  HorizonMetrics validation;
  HorizonMetrics test;
  std::vector<double> loss_history;
};

struct MetricStat {
  double mean = 0.0;
  double half_width = 0.0;
};

struct DatasetStats {
  MetricStat overall;
  std::vector<MetricStat> per_horizon;
};

/// Mean +- 95% half-width per metric over completed trials, plus the
/// per-trial detail in trial order.
struct ExperimentSummary {
  DatasetStats train;
  DatasetStats validation;
  DatasetStats test;
  std::size_t trial_count = 0;     // completed (non-diverged)
  std::size_t diverged_count = 0;
  std::vector<TrialOutcome> trials;
  ModelSpec spec;
  TrainingConfig config;
};

/// Runs config.trials independent trainings (trial k seeded with
/// base_seed + k), evaluates per-horizon RMSE in denormalized units and
/// aggregates. Trials run in parallel capped by AQCAST_THREADS; the
/// summary is identical for serial and parallel execution. Diverged
/// trials are excluded and counted.
ExperimentSummary run_trials(const DataBundle& bundle, const ModelSpec& spec,
                             const TrainingConfig& config);

/// Pure fold from per-trial outcomes (in trial order) to the summary.
/// Diverged outcomes are excluded from every statistic and counted;
/// all-diverged raises DivergenceError.
ExperimentSummary summarize_trials(std::vector<TrialOutcome> outcomes,
                                   const ModelSpec& spec, const TrainingConfig& config,
                                   std::size_t horizon);

/// Trials-loop thread budget: AQCAST_THREADS when set, else all cores.
int trial_thread_budget();

// --- closed-loop forecasting -------------------------------------------------

/// Maps the latest `lookback` history values to `horizon` predictions.
using ForecastStepFn = std::function<std::vector<double>(std::span<const double>)>;

/// Repeatedly predicts horizon-sized blocks, feeding predictions back as
/// history and sliding by the full horizon, until `steps` values exist
/// (the last block is truncated). ceil(steps / horizon) invocations.
std::vector<double> closed_loop_forecast(const ForecastStepFn& step_fn,
                                         std::span<const double> seed_window,
                                         std::size_t steps, std::size_t horizon);

struct ForecastResult {
  std::vector<Instant> timestamps;
  std::vector<double> mean;
  std::vector<double> half_width_95;
  std::vector<std::vector<double>> trajectories;  // trials x steps, denormalized
};

/// Single closed-loop trajectory from a univariate model (denormalized via
/// its scaler). Multivariate models are rejected: predictions alone cannot
/// refill an 11-feature input.
ForecastResult recursive_forecast(const TrainedModel& model,
                                  std::span<const double> seed_window_scaled,
                                  std::size_t steps, Instant start);

/// Per-step mean and 95% half-width over one trajectory per trained model.
ForecastResult forecast_with_uncertainty(std::span<const TrainedModel> models,
                                         std::span<const double> seed_window_scaled,
                                         std::size_t steps, Instant start);

// --- plot-ready writers --------------------------------------------------------

/// Rows Train, Test, Step-1..Step-N with columns mean,half_width_95
/// (Step-h is the test-set horizon-h RMSE).
void write_summary_csv(const ExperimentSummary& summary, std::ostream& out);

/// trial,epoch,loss rows for every completed trial.
void write_loss_curves_csv(const ExperimentSummary& summary, std::ostream& out);

/// timestamp,mean,lower95,upper95 rows.
void write_forecast_csv(const ForecastResult& forecast, std::ostream& out);

}  // namespace aqcast
