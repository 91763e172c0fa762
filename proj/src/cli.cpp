#include "aqcast/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "aqcast/config.hpp"
#include "aqcast/errors.hpp"
#include "aqcast/experiment.hpp"
#include "aqcast/model.hpp"
#include "aqcast/timeseries.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;

namespace aqcast::cli {

namespace {

TimeSeriesFrame load_frame(const std::string& path, const std::string& station) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input '" + path + "'");
  return parse_station_csv(in, station.empty() ? fs::path(path).stem().string() : station);
}

void write_text_file(const std::string& path, const std::string& contents) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output '" + path + "'");
  out << contents;
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string jsonl_sibling(const std::string& csv_path) {
  fs::path p(csv_path);
  p.replace_extension(".jsonl");
  return p.string();
}

}  // namespace

std::string fnv1a64_file_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for digest");
  std::uint64_t hash = 14695981039346656037ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 1099511628211ull;
    }
    if (!in) break;
  }
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << hash;
  return hex.str();
}

void RunManifest::write_and_validate(const std::string& path) const {
  for (const std::string& out : output_paths)
    if (!fs::exists(out)) throw IoError("declared output missing: '" + out + "'");

  nlohmann::json j;
  j["tool_version"] = tool_version;
  j["command"] = command;
  j["config_path"] = config_path;
  j["inputs"] = nlohmann::json::array();
  for (const auto& [file, digest] : input_digests)
    j["inputs"].push_back({{"path", file}, {"fnv1a64", digest}});
  j["seeds"] = seeds;
  j["outputs"] = output_paths;
  write_text_file(path, j.dump(2) + "\n");
}

int cmd_ingest(const IngestArgs& args) {
  const TimeSeriesFrame raw = load_frame(args.input, args.station);
  const std::size_t missing = raw.missing_count();
  const TimeSeriesFrame imputed = impute_neighbor_median(raw, args.impute_k);

  std::ostringstream body;
  write_station_csv(imputed, body);
  write_text_file(args.output, body.str());

  std::cout << "ingested " << args.input << ": rows " << imputed.row_count() << ", features "
            << imputed.feature_count() << ", repaired " << missing << '\n';
  return 0;
}

int cmd_stats(const StatsArgs& args) {
  if (args.inputs.empty()) throw ConfigError("stats: at least one --input required");
  const Instant from = parse_instant(args.from);
  const Instant to = parse_instant(args.to);

  std::string csv = "station,feature,from,to,mean,half_width_95,n\n";
  std::string jsonl;
  for (const std::string& path : args.inputs) {
    const TimeSeriesFrame frame = load_frame(path, "");
    const PeriodSummary s = period_stats(frame, args.feature, from, to);
    csv += frame.station();
    csv += ',';
    csv += s.feature;
    csv += ',';
    csv += format_instant(s.start);
    csv += ',';
    csv += format_instant(s.end);
    csv += ',';
    csv += format_double(s.mean);
    csv += ',';
    csv += format_double(s.half_width_95);
    csv += ',';
    csv += std::to_string(s.sample_count);
    csv += '\n';

    nlohmann::json record;
    record["station"] = frame.station();
    record["feature"] = s.feature;
    record["from"] = format_instant(s.start);
    record["to"] = format_instant(s.end);
    record["mean"] = s.mean;
    record["half_width_95"] = s.half_width_95;
    record["n"] = s.sample_count;
    jsonl += record.dump() + "\n";

    std::cout << frame.station() << " " << s.feature << ": mean " << s.mean << " +- "
              << s.half_width_95 << " (n=" << s.sample_count << ")\n";
  }
  if (!args.out_path.empty()) {
    write_text_file(args.out_path, csv);
    write_text_file(jsonl_sibling(args.out_path), jsonl);
  }
  return 0;
}

int cmd_correlate(const CorrelateArgs& args) {
  TimeSeriesFrame frame = load_frame(args.input, args.station);
  if (frame.missing_count() > 0) frame = impute_neighbor_median(frame, args.impute_k);
  const CorrelationMatrix cm = pearson_matrix(frame);

  std::string csv = "feature";
  for (const auto& name : cm.feature_names) {
    csv += ',';
    csv += name;
  }
  csv += '\n';
  const std::size_t n = cm.feature_names.size();
  for (std::size_t i = 0; i < n; ++i) {
    csv += cm.feature_names[i];
    for (std::size_t j = 0; j < n; ++j) {
      csv += ',';
      csv += format_double(cm.coefficients(i, j));
    }
    csv += '\n';
  }
  write_text_file(args.out_path, csv);

  // one record per unordered pair; the matrix is symmetric
  std::string jsonl;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      nlohmann::json record;
      record["feature_a"] = cm.feature_names[i];
      record["feature_b"] = cm.feature_names[j];
      record["coefficient"] = cm.coefficients(i, j);
      record["defined"] = cm.is_defined(i, j);
      jsonl += record.dump() + "\n";
    }
  write_text_file(jsonl_sibling(args.out_path), jsonl);

  std::cout << "wrote " << args.out_path << " (" << n << "x" << n << ")\n";
  return 0;
}

namespace {

std::string cell_tag(ModelKind kind, FeatureMode mode, Strategy strategy) {
  std::string tag = to_string(kind);
  tag += '_';
  tag += to_string(mode);
  tag += '_';
  tag += to_string(strategy);
  return tag;
}

}  // namespace

int cmd_experiment(const ExperimentArgs& args) {
  const KeyValueConfig kv = KeyValueConfig::parse_file(args.config_path);
  ExperimentConfig cfg = ExperimentConfig::from_kv(kv);
  if (args.seed) cfg.base_seed = *args.seed;
  if (cfg.input_path.empty()) throw ConfigError("config: missing key 'input'");

  const TimeSeriesFrame raw = load_frame(cfg.input_path, cfg.station);
  const TimeSeriesFrame imputed =
      raw.missing_count() > 0 ? impute_neighbor_median(raw, cfg.impute_k) : raw;

  RunManifest manifest;
  manifest.command = "experiment";
  manifest.config_path = args.config_path;
  manifest.input_digests.emplace_back(cfg.input_path, fnv1a64_file_hex(cfg.input_path));

  nlohmann::json cells = nlohmann::json::array();

  for (ModelKind kind : cfg.models) {
    for (FeatureMode mode : cfg.modes) {
      for (Strategy strategy : cfg.strategies) {
        const ModelSpec spec = cfg.model_spec(kind, mode);
        const TrainingConfig tc = cfg.training_config(mode, strategy);
        const DataBundle bundle = prepare_bundle(imputed, cfg.lookback, cfg.horizon, tc.split);
        const ExperimentSummary summary = run_trials(bundle, spec, tc);

        const std::string tag = cell_tag(kind, mode, strategy);
        const std::string summary_path =
            (fs::path(args.out_dir) / ("summary_" + tag + ".csv")).string();
        const std::string loss_path =
            (fs::path(args.out_dir) / ("loss_" + tag + ".csv")).string();

        std::ostringstream summary_body, loss_body;
        write_summary_csv(summary, summary_body);
        write_loss_curves_csv(summary, loss_body);
        write_text_file(summary_path, summary_body.str());
        write_text_file(loss_path, loss_body.str());
        manifest.output_paths.push_back(summary_path);
        manifest.output_paths.push_back(loss_path);

        nlohmann::json cell;
        cell["model"] = to_string(kind);
        cell["mode"] = to_string(mode);
        cell["strategy"] = to_string(strategy);
        cell["epochs"] = tc.epochs;
        cell["trials"] = tc.trials;
        cell["completed_trials"] = summary.trial_count;
        cell["diverged_trials"] = summary.diverged_count;
        cell["validation_rmse_mean"] = summary.validation.overall.mean;
        cell["validation_rmse_half_width"] = summary.validation.overall.half_width;
        cells.push_back(cell);

        std::cout << tag << ": train " << summary.train.overall.mean << " +- "
                  << summary.train.overall.half_width << ", test "
                  << summary.test.overall.mean << " +- " << summary.test.overall.half_width
                  << " (" << summary.trial_count << " trials, " << summary.diverged_count
                  << " diverged)\n";
      }
    }
  }

  for (std::size_t k = 0; k < cfg.trials; ++k) manifest.seeds.push_back(cfg.base_seed + k);

  const std::string manifest_path = (fs::path(args.out_dir) / "manifest.json").string();
  // The strategy-matrix detail rides along in the same JSON document.
  {
    nlohmann::json j;
    j["tool_version"] = manifest.tool_version;
    j["command"] = manifest.command;
    j["config_path"] = manifest.config_path;
    j["config"] = kv.entries();
    j["base_seed"] = cfg.base_seed;
    j["inputs"] = nlohmann::json::array();
    for (const auto& [file, digest] : manifest.input_digests)
      j["inputs"].push_back({{"path", file}, {"fnv1a64", digest}});
    j["seeds"] = manifest.seeds;
    j["outputs"] = manifest.output_paths;
    j["cells"] = cells;
    for (const std::string& out : manifest.output_paths)
      if (!fs::exists(out)) throw IoError("declared output missing: '" + out + "'");
    write_text_file(manifest_path, j.dump(2) + "\n");
  }
  std::cout << "wrote " << manifest_path << '\n';
  return 0;
}

int cmd_forecast(const ForecastArgs& args) {
  ExperimentConfig cfg = ExperimentConfig::from_kv(KeyValueConfig::parse_file(args.config_path));
  if (args.seed) cfg.base_seed = *args.seed;
  if (args.trials) cfg.trials = *args.trials;
  if (cfg.input_path.empty()) throw ConfigError("config: missing key 'input'");

  // Closed-loop feedback refills only PM2.5, so the forecast path is
  // univariate regardless of what the experiment section requests.
  const FeatureMode mode = FeatureMode::univariate;
  const Strategy strategy =
      cfg.strategies.size() == 1 ? cfg.strategies.front() : Strategy::plain;
  const ModelKind kind = cfg.models.front();

  const TimeSeriesFrame raw = load_frame(cfg.input_path, cfg.station);
  const TimeSeriesFrame imputed =
      raw.missing_count() > 0 ? impute_neighbor_median(raw, cfg.impute_k) : raw;

  const TrainingConfig tc = cfg.training_config(mode, strategy);
  const DataBundle bundle = prepare_bundle(imputed, cfg.lookback, cfg.horizon, tc.split);

  std::vector<TrainedModel> models;
  if (!args.checkpoint_dir.empty()) {
    if (!fs::is_directory(args.checkpoint_dir))
      throw IoError("checkpoint directory '" + args.checkpoint_dir + "' does not exist");
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(args.checkpoint_dir))
      if (entry.path().extension() == ".ckpt") files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty())
      throw IoError("no .ckpt checkpoints in '" + args.checkpoint_dir + "'");
    for (const std::string& file : files) {
      std::ifstream in(file);
      if (!in) throw IoError("cannot open checkpoint '" + file + "'");
      models.push_back(load_checkpoint(in));
    }
  } else {
    const ModelSpec spec = cfg.model_spec(kind, mode);
    const TrainOptions opt{tc.epochs, tc.batch_size, tc.adam};
    models.resize(cfg.trials);
    std::string trial_error;
    const int threads =
        std::min<int>(trial_thread_budget(), static_cast<int>(cfg.trials));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (long long k = 0; k < static_cast<long long>(cfg.trials); ++k) {
      try {
        TrainedModel model = build_model(spec, cfg.base_seed + static_cast<std::uint64_t>(k));
        model.scaler = bundle.scaler;
        train(model, bundle.train, opt);
        models[static_cast<std::size_t>(k)] = std::move(model);
      } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
        if (trial_error.empty()) trial_error = e.what();
      }
    }
    if (!trial_error.empty()) throw Error("forecast: " + trial_error);
  }

  const ForecastResult forecast = forecast_with_uncertainty(
      models, bundle.seed_window_scaled, args.steps, bundle.forecast_start);

  RunManifest manifest;
  manifest.command = "forecast";
  manifest.config_path = args.config_path;
  manifest.input_digests.emplace_back(cfg.input_path, fnv1a64_file_hex(cfg.input_path));
  for (const TrainedModel& m : models) manifest.seeds.push_back(m.seed);

  const std::string forecast_path = (fs::path(args.out_dir) / "forecast.csv").string();
  std::ostringstream body;
  write_forecast_csv(forecast, body);
  write_text_file(forecast_path, body.str());
  manifest.output_paths.push_back(forecast_path);

  if (args.save_checkpoints) {
    const fs::path ckpt_dir = fs::path(args.out_dir) / "checkpoints";
    fs::create_directories(ckpt_dir);
    for (std::size_t k = 0; k < models.size(); ++k) {
      const std::string path =
          (ckpt_dir / ("trial_" + std::to_string(k) + ".ckpt")).string();
      std::ostringstream ckpt;
      save_checkpoint(models[k], ckpt);
      write_text_file(path, ckpt.str());
      manifest.output_paths.push_back(path);
    }
  }

  manifest.write_and_validate((fs::path(args.out_dir) / "forecast_manifest.json").string());
  std::cout << "wrote " << forecast_path << " (" << forecast.timestamps.size() << " steps, "
            << models.size() << " trajectories)\n";
  return 0;
}

int cmd_describe(const DescribeArgs& args) {
  std::vector<ModelKind> kinds;
  if (args.model.empty())
    kinds = {ModelKind::FNN, ModelKind::LSTM, ModelKind::BDLSTM, ModelKind::EDLSTM};
  else
    kinds = {model_kind_from_string(args.model)};

  for (ModelKind kind : kinds) {
    ModelSpec spec;
    spec.kind = kind;
    spec.lookback = args.lookback;
    spec.input_features = args.features;
    spec.horizon = args.horizon;
    spec.fnn_hidden1 = args.fnn_hidden1;
    spec.fnn_hidden2 = args.fnn_hidden2;
    spec.lstm_hidden = args.lstm_hidden;
    std::cout << describe_model(spec);
  }
  return 0;
}

}  // namespace aqcast::cli
