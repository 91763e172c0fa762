#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aqcast/experiment.hpp"
#include "aqcast/model.hpp"
#include "aqcast/windowing.hpp"

namespace aqcast {

/// Flat `key = value` config text: one pair per line, `#` comments,
/// blank lines ignored. Unknown keys are rejected by name.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig parse_file(const std::string& path);

  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;  // throws ConfigError if absent
  std::string get_or(const std::string& key, const std::string& fallback) const;

  /// Throws ConfigError naming the first key outside `allowed`.
  void require_known_keys(const std::vector<std::string>& allowed) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

/// Typed experiment configuration resolved from a key-value file.
/// `model`, `mode` and `strategy` accept comma-separated lists; the
/// experiment command runs their cross product.
struct ExperimentConfig {
  std::string input_path;
  std::string station = "station";
  std::vector<ModelKind> models{ModelKind::BDLSTM};
  std::vector<FeatureMode> modes{FeatureMode::multivariate};
  std::vector<Strategy> strategies{Strategy::plain};
  std::size_t lookback = 5;
  std::size_t horizon = 10;
  std::optional<std::size_t> epochs;  // unset -> per-strategy default
  std::size_t batch_size = 20;
  std::size_t trials = 30;
  std::optional<Instant> train_end;
  std::optional<SeasonalMonths> seasonal_months;
  std::uint64_t base_seed = 1;
  std::uint64_t shuffle_seed = 99;
  AdamHyper adam;
  int impute_k = 2;
  std::size_t fnn_hidden1 = 64;
  std::size_t fnn_hidden2 = 32;
  std::size_t lstm_hidden = 50;

  static ExperimentConfig from_kv(const KeyValueConfig& kv);

  /// 200 epochs, or 1000 univariate / 50 seasonal when not set explicitly.
  std::size_t resolved_epochs(FeatureMode mode, Strategy strategy) const;

  SplitSpec split_for(FeatureMode mode, Strategy strategy) const;
  ModelSpec model_spec(ModelKind kind, FeatureMode mode) const;
  TrainingConfig training_config(FeatureMode mode, Strategy strategy) const;
};

}  // namespace aqcast
