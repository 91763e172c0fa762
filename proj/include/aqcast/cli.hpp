#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace aqcast::cli {

inline constexpr const char* kToolVersion = "aqcast 1.0.0";

/// Everything a run records about itself. Serialized as JSON next to the
/// outputs; contains no wall-clock data so reruns are byte-identical.
struct RunManifest {
  std::string command;
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> input_digests;  // path, fnv1a64 hex
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> output_paths;
  std::string tool_version = kToolVersion;

  /// Writes JSON and verifies every listed output exists.
  void write_and_validate(const std::string& path) const;
};

/// 64-bit FNV-1a over the file bytes, as lowercase hex.
std::string fnv1a64_file_hex(const std::string& path);

struct IngestArgs {
  std::string input;
  std::string output;
  std::string station;
  int impute_k = 2;
};
int cmd_ingest(const IngestArgs& args);

struct StatsArgs {
  std::vector<std::string> inputs;
  std::string feature = "PM2.5";
  std::string from;
  std::string to;
  std::string out_path;  // empty: stdout only
};
int cmd_stats(const StatsArgs& args);

struct CorrelateArgs {
  std::string input;
  std::string station;
  std::string out_path;
  int impute_k = 2;
};
int cmd_correlate(const CorrelateArgs& args);

struct ExperimentArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the config's seed
};
int cmd_experiment(const ExperimentArgs& args);

struct ForecastArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::size_t steps = 90;  // 720 hours at 8-hour cadence
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::string checkpoint_dir;  // load instead of training when set
  bool save_checkpoints = false;
};
int cmd_forecast(const ForecastArgs& args);

struct DescribeArgs {
  std::string model;  // empty: all four kinds
  std::size_t lookback = 5;
  std::size_t features = 11;
  std::size_t horizon = 10;
  std::size_t fnn_hidden1 = 64;
  std::size_t fnn_hidden2 = 32;
  std::size_t lstm_hidden = 50;
};
int cmd_describe(const DescribeArgs& args);

}  // namespace aqcast::cli
