#include "aqcast/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "aqcast/errors.hpp"

namespace aqcast {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ConfigError("config: key '" + key + "' expects a non-negative integer, got '" +
                      value + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ConfigError("config: key '" + key + "' expects a number, got '" + value + "'");
  return out;
}

FeatureMode mode_from_string(const std::string& name) {
  if (name == "multivariate") return FeatureMode::multivariate;
  if (name == "univariate") return FeatureMode::univariate;
  throw ConfigError("config: unknown mode '" + name + "'");
}

Strategy strategy_from_string(const std::string& name) {
  if (name == "plain") return Strategy::plain;
  if (name == "shuffled") return Strategy::shuffled;
  if (name == "seasonal") return Strategy::seasonal;
  throw ConfigError("config: unknown strategy '" + name + "'");
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (cfg.entries_.count(key))
      throw ConfigError("config: duplicate key '" + key + "'");
    cfg.entries_[key] = value;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse(in);
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string KeyValueConfig::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("config: missing key '" + key + "'");
  return it->second;
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

void KeyValueConfig::require_known_keys(const std::vector<std::string>& allowed) const {
  for (const auto& [key, value] : entries_)
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("config: unknown key '" + key + "'");
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValueConfig& kv) {
  kv.require_known_keys({"input", "station", "model", "mode", "strategy", "lookback",
                         "horizon", "epochs", "batch_size", "trials", "train_end",
                         "seasonal_months", "seed", "shuffle_seed", "learning_rate", "beta1",
                         "beta2", "epsilon", "impute_k", "fnn_hidden1", "fnn_hidden2",
                         "lstm_hidden"});

  ExperimentConfig cfg;
  cfg.input_path = kv.get_or("input", "");
  cfg.station = kv.get_or("station", "station");

  if (kv.has("model")) {
    cfg.models.clear();
    for (const auto& name : split_list(kv.get("model")))
      cfg.models.push_back(model_kind_from_string(name));
    if (cfg.models.empty()) throw ConfigError("config: key 'model' is empty");
  }
  if (kv.has("mode")) {
    cfg.modes.clear();
    for (const auto& name : split_list(kv.get("mode"))) cfg.modes.push_back(mode_from_string(name));
    if (cfg.modes.empty()) throw ConfigError("config: key 'mode' is empty");
  }
  if (kv.has("strategy")) {
    cfg.strategies.clear();
    for (const auto& name : split_list(kv.get("strategy")))
      cfg.strategies.push_back(strategy_from_string(name));
    if (cfg.strategies.empty()) throw ConfigError("config: key 'strategy' is empty");
  }

  if (kv.has("lookback")) cfg.lookback = parse_size("lookback", kv.get("lookback"));
  if (kv.has("horizon")) cfg.horizon = parse_size("horizon", kv.get("horizon"));
  if (kv.has("epochs")) cfg.epochs = parse_size("epochs", kv.get("epochs"));
  if (kv.has("batch_size")) cfg.batch_size = parse_size("batch_size", kv.get("batch_size"));
  if (kv.has("trials")) cfg.trials = parse_size("trials", kv.get("trials"));
  if (kv.has("train_end")) cfg.train_end = parse_instant(kv.get("train_end"));
  if (kv.has("seasonal_months")) {
    const std::string raw = kv.get("seasonal_months");
    const auto dash = raw.find('-');
    if (dash == std::string::npos)
      throw ConfigError("config: seasonal_months expects 'start-end', got '" + raw + "'");
    SeasonalMonths months{};
    months.start_month = static_cast<int>(parse_size("seasonal_months", trim(raw.substr(0, dash))));
    months.end_month = static_cast<int>(parse_size("seasonal_months", trim(raw.substr(dash + 1))));
    cfg.seasonal_months = months;
  }
  if (kv.has("seed")) cfg.base_seed = parse_size("seed", kv.get("seed"));
  if (kv.has("shuffle_seed")) cfg.shuffle_seed = parse_size("shuffle_seed", kv.get("shuffle_seed"));
  if (kv.has("learning_rate")) cfg.adam.alpha = parse_real("learning_rate", kv.get("learning_rate"));
  if (kv.has("beta1")) cfg.adam.beta1 = parse_real("beta1", kv.get("beta1"));
  if (kv.has("beta2")) cfg.adam.beta2 = parse_real("beta2", kv.get("beta2"));
  if (kv.has("epsilon")) cfg.adam.epsilon = parse_real("epsilon", kv.get("epsilon"));
  if (kv.has("impute_k")) cfg.impute_k = static_cast<int>(parse_size("impute_k", kv.get("impute_k")));
  if (kv.has("fnn_hidden1")) cfg.fnn_hidden1 = parse_size("fnn_hidden1", kv.get("fnn_hidden1"));
  if (kv.has("fnn_hidden2")) cfg.fnn_hidden2 = parse_size("fnn_hidden2", kv.get("fnn_hidden2"));
  if (kv.has("lstm_hidden")) cfg.lstm_hidden = parse_size("lstm_hidden", kv.get("lstm_hidden"));
  return cfg;
}

std::size_t ExperimentConfig::resolved_epochs(FeatureMode mode, Strategy strategy) const {
  if (epochs) return *epochs;
  if (strategy == Strategy::seasonal) return 50;
  if (mode == FeatureMode::univariate) return 1000;
  return 200;
}

SplitSpec ExperimentConfig::split_for(FeatureMode mode, Strategy strategy) const {
  if (!train_end) throw ConfigError("config: missing key 'train_end'");
  SplitSpec split;
  split.train_end = *train_end;
  split.mode = mode;
  split.strategy = strategy;
  split.seasonal_months = seasonal_months;
  if (strategy == Strategy::shuffled) split.shuffle_seed = shuffle_seed;
  split.validate();
  return split;
}

ModelSpec ExperimentConfig::model_spec(ModelKind kind, FeatureMode mode) const {
  ModelSpec spec;
  spec.kind = kind;
  spec.lookback = lookback;
  spec.horizon = horizon;
  spec.input_features = mode == FeatureMode::univariate ? 1 : kStationColumns.size() - 1;
  spec.fnn_hidden1 = fnn_hidden1;
  spec.fnn_hidden2 = fnn_hidden2;
  spec.lstm_hidden = lstm_hidden;
  return spec;
}

TrainingConfig ExperimentConfig::training_config(FeatureMode mode, Strategy strategy) const {
  TrainingConfig tc;
  tc.epochs = resolved_epochs(mode, strategy);
  tc.batch_size = batch_size;
  tc.adam = adam;
  tc.trials = trials;
  tc.base_seed = base_seed;
  tc.split = split_for(mode, strategy);
  tc.validate();
  return tc;
}

}  // namespace aqcast
