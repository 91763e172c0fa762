#include "aqcast/metrics.hpp"

#include <cmath>

#include "aqcast/errors.hpp"

namespace aqcast {

double rmse(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) throw ShapeError("rmse: length mismatch");
  if (actual.empty()) throw ShapeError("rmse: empty input");
  double sq = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double d = actual[i] - predicted[i];
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(actual.size()));
}

HorizonMetrics horizon_rmse(const Matrix& predictions, const Matrix& targets) {
  if (!predictions.same_shape(targets)) throw ShapeError("horizon_rmse: shape mismatch");
  if (predictions.rows() == 0) throw ShapeError("horizon_rmse: no windows");

  const std::size_t windows = predictions.rows();
  const std::size_t horizons = predictions.cols();
  HorizonMetrics m;
  m.per_horizon_rmse.resize(horizons);

  double pooled = 0.0;
  for (std::size_t h = 0; h < horizons; ++h) {
    double sq = 0.0;
    for (std::size_t w = 0; w < windows; ++w) {
      const double d = predictions(w, h) - targets(w, h);
      sq += d * d;
    }
    m.per_horizon_rmse[h] = std::sqrt(sq / static_cast<double>(windows));
    pooled += sq;
  }
  m.overall_rmse = std::sqrt(pooled / static_cast<double>(windows * horizons));
  return m;
}

ConfidenceInterval confidence_interval(std::span<const double> samples) {
  if (samples.empty()) throw ShapeError("confidence_interval: empty sample set");
  const std::size_t n = samples.size();
  double sum = 0.0;
  for (double v : samples) sum += v;
  const double mean = sum / static_cast<double>(n);
  double half = 0.0;
  if (n > 1) {
    double sq = 0.0;
    for (double v : samples) sq += (v - mean) * (v - mean);
    const double s = std::sqrt(sq / static_cast<double>(n - 1));
    half = 1.96 * s / std::sqrt(static_cast<double>(n));
  }
  return {mean, half};
}

}  // namespace aqcast
