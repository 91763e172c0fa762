#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "aqcast/cli.hpp"
#include "aqcast/errors.hpp"

using namespace aqcast;

int main(int argc, char** argv) {
  CLI::App app{"Multi-step-ahead PM2.5 forecasting with hand-rolled LSTM models"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_dir = ".";
  std::string config_path;
  std::uint64_t seed_flag = 0;
  const auto* seed_opt = app.add_option("--seed", seed_flag, "Base seed override");
  app.add_option("--out-dir", out_dir, "Directory for output files");
  app.add_option("--config", config_path, "Experiment config file");

  cli::IngestArgs ingest;
  auto* cmd_ingest = app.add_subcommand("ingest", "Parse, validate and impute a station CSV");
  cmd_ingest->add_option("--input", ingest.input, "Raw station CSV")->required();
  cmd_ingest->add_option("--output", ingest.output, "Imputed canonical CSV")->required();
  cmd_ingest->add_option("--station", ingest.station, "Station name (default: file stem)");
  cmd_ingest->add_option("--impute-k", ingest.impute_k, "Neighbor rows per side (default 2)");

  cli::StatsArgs stats;
  auto* cmd_stats = app.add_subcommand("stats", "Period mean with 95% confidence half-width");
  cmd_stats->add_option("--input", stats.inputs, "Station CSV (repeatable)")->required();
  cmd_stats->add_option("--feature", stats.feature, "Feature name (default PM2.5)");
  cmd_stats->add_option("--from", stats.from, "Period start, YYYY-MM-DDTHH:MM")->required();
  cmd_stats->add_option("--to", stats.to, "Period end (inclusive)")->required();
  cmd_stats->add_option("--out", stats.out_path, "Write the batch CSV here");

  cli::CorrelateArgs correlate;
  auto* cmd_corr = app.add_subcommand("correlate", "Pearson matrix, heat-map-ready CSV");
  cmd_corr->add_option("--input", correlate.input, "Station CSV")->required();
  cmd_corr->add_option("--station", correlate.station, "Station name");
  cmd_corr->add_option("--out", correlate.out_path, "Output CSV")->required();
  cmd_corr->add_option("--impute-k", correlate.impute_k, "Neighbor rows per side");

  auto* cmd_exp = app.add_subcommand("experiment", "Run the model/strategy matrix");

  cli::ForecastArgs forecast;
  auto* cmd_fc = app.add_subcommand("forecast", "Closed-loop forecast with uncertainty");
  cmd_fc->add_option("--steps", forecast.steps, "Future steps (default 90 = 720 hours)");
  std::size_t fc_trials = 0;
  const auto* fc_trials_opt = cmd_fc->add_option("--trials", fc_trials, "Trial count override");
  cmd_fc->add_option("--checkpoint-dir", forecast.checkpoint_dir,
                     "Load .ckpt models instead of training");
  cmd_fc->add_flag("--save-checkpoints", forecast.save_checkpoints,
                   "Save per-trial checkpoints next to the forecast");

  cli::DescribeArgs describe;
  auto* cmd_desc = app.add_subcommand("describe", "Layer shapes and parameter counts");
  cmd_desc->add_option("--model", describe.model, "FNN|LSTM|BDLSTM|EDLSTM (default: all)");
  cmd_desc->add_option("--lookback", describe.lookback, "Window size (default 5)");
  cmd_desc->add_option("--features", describe.features, "Input features (default 11)");
  cmd_desc->add_option("--horizon", describe.horizon, "Output steps (default 10)");
  cmd_desc->add_option("--lstm-hidden", describe.lstm_hidden, "LSTM cells (default 50)");

  CLI11_PARSE(app, argc, argv);

  const std::optional<std::uint64_t> seed =
      seed_opt->count() ? std::optional<std::uint64_t>(seed_flag) : std::nullopt;

  try {
    if (cmd_ingest->parsed()) return cli::cmd_ingest(ingest);
    if (cmd_stats->parsed()) return cli::cmd_stats(stats);
    if (cmd_corr->parsed()) return cli::cmd_correlate(correlate);
    if (cmd_exp->parsed()) {
      if (config_path.empty()) throw ConfigError("experiment: --config is required");
      return cli::cmd_experiment({config_path, out_dir, seed});
    }
    if (cmd_fc->parsed()) {
      if (config_path.empty()) throw ConfigError("forecast: --config is required");
      forecast.config_path = config_path;
      forecast.out_dir = out_dir;
      forecast.seed = seed;
      if (fc_trials_opt->count()) forecast.trials = fc_trials;
      return cli::cmd_forecast(forecast);
    }
    if (cmd_desc->parsed()) return cli::cmd_describe(describe);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
