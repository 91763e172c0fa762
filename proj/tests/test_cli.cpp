#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <sstream>

#include <doctest.h>

#include "aqcast/cli.hpp"
#include "aqcast/errors.hpp"
#include "aqcast/timeseries.hpp"
#include "helpers.hpp"

using namespace aqcast;
using namespace aqcast::testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("aqcast_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("cmd_ingest: repairs missing cells and is idempotent") {
  TempDir dir;
  TimeSeriesFrame frame = make_frame(30, 44);
  Matrix values = frame.values();
  values(3, 2) = std::numeric_limits<double>::quiet_NaN();
  values(20, 7) = std::numeric_limits<double>::quiet_NaN();
  const TimeSeriesFrame holey(frame.station(), frame.timestamps(), frame.feature_names(),
                              std::move(values));
  write_file(dir.file("raw.csv"), frame_to_csv(holey));

  cli::IngestArgs args;
  args.input = dir.file("raw.csv");
  args.output = dir.file("clean.csv");
  args.station = "test";
  CHECK(cli::cmd_ingest(args) == 0);

  std::ifstream in(args.output);
  const TimeSeriesFrame clean = parse_station_csv(in, "test");
  CHECK(clean.missing_count() == 0);
  CHECK(clean.row_count() == 30);

  // ingesting the cleaned output changes nothing
  cli::IngestArgs again;
  again.input = args.output;
  again.output = dir.file("clean2.csv");
  again.station = "test";
  CHECK(cli::cmd_ingest(again) == 0);
  CHECK(read_file(args.output) == read_file(again.output));
}

TEST_CASE("cmd_ingest: schema error propagates") {
  TempDir dir;
  write_file(dir.file("bad.csv"), "timestamp,PM10,Bogus\n2020-01-01T00:00,1,2\n");
  cli::IngestArgs args;
  args.input = dir.file("bad.csv");
  args.output = dir.file("out.csv");
  CHECK_THROWS_AS(cli::cmd_ingest(args), SchemaError);
}

TEST_CASE("cmd_stats: constant frame and multi-station batch") {
  TempDir dir;
  // constant PM2.5 column
  TimeSeriesFrame base = make_frame(20, 4);
  Matrix values = base.values();
  const std::size_t pm25 = base.feature_index(kPm25);
  for (std::size_t r = 0; r < 20; ++r) values(r, pm25) = 42.0;
  const TimeSeriesFrame constant(base.station(), base.timestamps(), base.feature_names(),
                                 std::move(values));
  write_file(dir.file("a.csv"), frame_to_csv(constant));
  write_file(dir.file("b.csv"), frame_to_csv(make_frame(20, 5)));

  cli::StatsArgs args;
  args.inputs = {dir.file("a.csv"), dir.file("b.csv")};
  args.feature = "PM2.5";
  args.from = format_instant(constant.timestamps().front());
  args.to = format_instant(constant.timestamps().back());
  args.out_path = dir.file("stats.csv");
  CHECK(cli::cmd_stats(args) == 0);

  const std::string csv = read_file(args.out_path);
  // header plus one row per station
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find("a,PM2.5") != std::string::npos);
  CHECK(csv.find("42,0,") != std::string::npos);  // mean 42, half-width 0

  // one-record-per-line JSON rides along
  const std::string jsonl = read_file(dir.file("stats.jsonl"));
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 2);
  CHECK(jsonl.find("\"station\":\"a\"") != std::string::npos);
  CHECK(jsonl.find("\"half_width_95\":0.0") != std::string::npos);
}

TEST_CASE("cmd_correlate: symmetric output with exact derived pairs") {
  TempDir dir;
  // make NO2 an exact affine copy of NO
  TimeSeriesFrame base = make_frame(40, 6);
  Matrix values = base.values();
  const std::size_t no = base.feature_index("NO");
  const std::size_t no2 = base.feature_index("NO2");
  for (std::size_t r = 0; r < 40; ++r) values(r, no2) = 2.0 * values(r, no) + 3.0;
  const TimeSeriesFrame frame(base.station(), base.timestamps(), base.feature_names(),
                              std::move(values));
  write_file(dir.file("s.csv"), frame_to_csv(frame));

  cli::CorrelateArgs args;
  args.input = dir.file("s.csv");
  args.out_path = dir.file("corr.csv");
  CHECK(cli::cmd_correlate(args) == 0);

  // file-level symmetry check
  std::ifstream in(args.out_path);
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("feature,PM10,", 0) == 0);
  std::vector<std::vector<std::string>> cells;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    cells.push_back(row);
  }
  REQUIRE(cells.size() == 12);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j) CHECK(cells[i][j + 1] == cells[j][i + 1]);

  CHECK(std::stod(cells[no][no2 + 1]) == doctest::Approx(1.0).epsilon(1e-12));

  // pairwise JSON records: 12 features -> 78 unordered pairs
  const std::string jsonl = read_file(dir.file("corr.jsonl"));
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 78);
  CHECK(jsonl.find("\"feature_a\":\"NO\"") != std::string::npos);
  CHECK(jsonl.find("\"defined\":true") != std::string::npos);
}

TEST_CASE("cmd_experiment: strategy matrix, outputs and manifest") {
  TempDir dir;
  const TimeSeriesFrame frame = make_wave_frame(6 * 365, 0.3, 7);  // two years
  write_file(dir.file("station.csv"), frame_to_csv(frame));
  write_file(dir.file("exp.txt"),
             "input = " + dir.file("station.csv") + "\n" +
                 "station = wave\n"
                 "model = FNN,LSTM\n"
                 "mode = univariate\n"
                 "strategy = plain,seasonal\n"
                 "seasonal_months = 2-9\n"
                 "lookback = 4\n"
                 "horizon = 3\n"
                 "epochs = 2\n"
                 "batch_size = 16\n"
                 "trials = 2\n"
                 "fnn_hidden1 = 8\n"
                 "fnn_hidden2 = 6\n"
                 "lstm_hidden = 6\n"
                 "train_end = 2020-06-01T00:00\n");

  cli::ExperimentArgs args;
  args.config_path = dir.file("exp.txt");
  args.out_dir = dir.file("out");
  CHECK(cli::cmd_experiment(args) == 0);

  for (const char* name :
       {"summary_FNN_univariate_plain.csv", "summary_FNN_univariate_seasonal.csv",
        "summary_LSTM_univariate_plain.csv", "summary_LSTM_univariate_seasonal.csv",
        "loss_LSTM_univariate_seasonal.csv", "manifest.json"})
    CHECK(fs::exists(fs::path(dir.file("out")) / name));

  const std::string summary = read_file(dir.file("out/summary_LSTM_univariate_plain.csv"));
  CHECK(summary.rfind("metric,mean,half_width_95\nTrain,", 0) == 0);
  CHECK(summary.find("\nTest,") != std::string::npos);
  CHECK(summary.find("\nStep-1,") != std::string::npos);
  CHECK(summary.find("\nStep-3,") != std::string::npos);
  CHECK(summary.find("\nStep-4,") == std::string::npos);  // horizon is 3

  const std::string manifest = read_file(dir.file("out/manifest.json"));
  CHECK(manifest.find("\"command\": \"experiment\"") != std::string::npos);
  CHECK(manifest.find("\"fnv1a64\"") != std::string::npos);
  CHECK(manifest.find("\"diverged_trials\": 0") != std::string::npos);
}

TEST_CASE("cmd_forecast: band shape, checkpoints, determinism") {
  TempDir dir;
  const TimeSeriesFrame frame = make_wave_frame(220, 0.2, 9);
  write_file(dir.file("station.csv"), frame_to_csv(frame));
  write_file(dir.file("fc.txt"),
             "input = " + dir.file("station.csv") + "\n" +
                 "model = LSTM\n"
                 "mode = univariate\n"
                 "lookback = 4\n"
                 "horizon = 3\n"
                 "epochs = 2\n"
                 "batch_size = 16\n"
                 "trials = 2\n"
                 "lstm_hidden = 6\n"
                 "train_end = " +
                 format_instant(frame.timestamps()[154]) + "\n");

  cli::ForecastArgs args;
  args.config_path = dir.file("fc.txt");
  args.out_dir = dir.file("out1");
  args.steps = 90;
  args.save_checkpoints = true;
  CHECK(cli::cmd_forecast(args) == 0);

  const std::string csv = read_file(dir.file("out1/forecast.csv"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 91);  // header + 90 steps
  CHECK(csv.rfind("timestamp,mean,lower95,upper95\n", 0) == 0);
  CHECK(fs::exists(dir.file("out1/checkpoints/trial_0.ckpt")));
  CHECK(fs::exists(dir.file("out1/checkpoints/trial_1.ckpt")));

  // reloading the checkpoints must reproduce the forecast byte for byte
  cli::ForecastArgs reload;
  reload.config_path = dir.file("fc.txt");
  reload.out_dir = dir.file("out2");
  reload.steps = 90;
  reload.checkpoint_dir = dir.file("out1/checkpoints");
  CHECK(cli::cmd_forecast(reload) == 0);
  CHECK(read_file(dir.file("out2/forecast.csv")) == csv);

  // trials = 1 collapses the band onto the mean
  cli::ForecastArgs single;
  single.config_path = dir.file("fc.txt");
  single.out_dir = dir.file("out3");
  single.steps = 12;
  single.trials = 1;
  CHECK(cli::cmd_forecast(single) == 0);
  std::ifstream in(dir.file("out3/forecast.csv"));
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string ts, mean, lo, hi;
    std::getline(ss, ts, ',');
    std::getline(ss, mean, ',');
    std::getline(ss, lo, ',');
    std::getline(ss, hi, ',');
    CHECK(lo == mean);
    CHECK(hi == mean);
  }

  // empty checkpoint dir is a hard error
  fs::create_directories(dir.file("empty"));
  cli::ForecastArgs missing;
  missing.config_path = dir.file("fc.txt");
  missing.out_dir = dir.file("out4");
  missing.checkpoint_dir = dir.file("empty");
  CHECK_THROWS_AS(cli::cmd_forecast(missing), IoError);
}

TEST_CASE("cmd_describe runs for each kind") {
  cli::DescribeArgs args;
  CHECK(cli::cmd_describe(args) == 0);
  args.model = "EDLSTM";
  CHECK(cli::cmd_describe(args) == 0);
  args.model = "GRU";
  CHECK_THROWS_AS(cli::cmd_describe(args), ConfigError);
}

TEST_CASE("fnv1a64 digest is stable") {
  TempDir dir;
  write_file(dir.file("x"), "hello");
  // reference value of FNV-1a 64 for "hello"
  CHECK(cli::fnv1a64_file_hex(dir.file("x")) == "a430d84680aabd0b");
}
