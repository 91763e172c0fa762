// Compares the OpenMP GEMM kernels against the serial reference and times
// one training epoch per model kind. Run manually; not part of ctest.

#include <chrono>
#include <cmath>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "aqcast/matrix.hpp"
#include "aqcast/model.hpp"
#include "aqcast/rng.hpp"
#include "aqcast/windowing.hpp"

using namespace aqcast;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.next_range(-1.0, 1.0);
  return m;
}

void bench_matmul(std::size_t n, int reps) {
  Rng rng(7);
  const Matrix a = random_matrix(n, n, rng);
  const Matrix b = random_matrix(n, n, rng);

  auto t0 = Clock::now();
  Matrix ref;
  for (int r = 0; r < reps; ++r) ref = serial::matmul(a, b);
  const double serial_s = seconds_since(t0) / reps;

  t0 = Clock::now();
  Matrix par;
  for (int r = 0; r < reps; ++r) par = matmul(a, b);
  const double parallel_s = seconds_since(t0) / reps;

  double max_diff = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i)
    max_diff = std::max(max_diff, std::abs(ref.data()[i] - par.data()[i]));

  std::printf("matmul %4zux%-4zu  serial %8.3f ms  omp %8.3f ms  speedup %5.2fx  maxdiff %g\n",
              n, n, serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s, max_diff);
}

WindowedDataset synthetic_dataset(std::size_t rows, std::size_t features) {
  Rng rng(11);
  std::vector<Instant> ts(rows);
  for (std::size_t i = 0; i < rows; ++i) ts[i] = static_cast<Instant>(i) * kCadence;
  std::vector<std::string> names(kStationColumns.begin(), kStationColumns.end());
  Matrix values(rows, names.size());
  for (std::size_t i = 0; i < values.size(); ++i) values.data()[i] = rng.next_double();
  TimeSeriesFrame frame("bench", std::move(ts), std::move(names), std::move(values));
  return build_windows(frame, 5, 10,
                       features == 1 ? FeatureMode::univariate : FeatureMode::multivariate);
}

void bench_epoch(ModelKind kind) {
  const WindowedDataset ds = synthetic_dataset(500, 11);
  ModelSpec spec;
  spec.kind = kind;
  spec.input_features = ds.feature_count;
  TrainedModel model = build_model(spec, 1);
  TrainOptions opt;
  opt.epochs = 1;

  const auto t0 = Clock::now();
  train(model, ds, opt);
  std::printf("train epoch %-6s  M=%zu batch=%zu  %8.1f ms\n", to_string(kind),
              ds.window_count(), opt.batch_size, seconds_since(t0) * 1e3);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP max threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP\n");
#endif

  bench_matmul(32, 200);
  bench_matmul(128, 50);
  bench_matmul(256, 10);
  bench_matmul(512, 3);

  bench_epoch(ModelKind::FNN);
  bench_epoch(ModelKind::LSTM);
  bench_epoch(ModelKind::BDLSTM);
  bench_epoch(ModelKind::EDLSTM);
  return 0;
}
