#pragma once

#include <span>
#include <string>
#include <vector>

#include "aqcast/matrix.hpp"

namespace aqcast {

/// sqrt(mean of squared errors); zero iff the sequences are equal.
double rmse(std::span<const double> actual, std::span<const double> predicted);

/// Per-horizon and pooled RMSE over an M x N_out prediction matrix.
struct HorizonMetrics {
  std::vector<double> per_horizon_rmse;
  double overall_rmse = 0.0;
  std::string dataset_label;
};

HorizonMetrics horizon_rmse(const Matrix& predictions, const Matrix& targets);

/// mean and 1.96 * s / sqrt(n) with the (n-1)-denominator sample standard
/// deviation; n = 1 gives half-width 0.
struct ConfidenceInterval {
  double mean = 0.0;
  double half_width_95 = 0.0;
};

ConfidenceInterval confidence_interval(std::span<const double> samples);

}  // namespace aqcast
