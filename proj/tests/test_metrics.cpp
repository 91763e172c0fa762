#include <cmath>
#include <vector>

#include <doctest.h>

#include "aqcast/errors.hpp"
#include "aqcast/metrics.hpp"
#include "aqcast/rng.hpp"

using namespace aqcast;

TEST_CASE("rmse: identities and the 3-4 example") {
  const std::vector<double> y{1.0, 2.0, 3.0};
  CHECK(rmse(y, y) == 0.0);

  const std::vector<double> zero{0.0, 0.0};
  const std::vector<double> p{3.0, 4.0};
  CHECK(rmse(zero, p) == doctest::Approx(std::sqrt(12.5)));

  // translation invariance
  std::vector<double> a{1.0, 5.0, -2.0, 0.5};
  std::vector<double> b{0.9, 5.2, -1.7, 0.4};
  std::vector<double> a_shift = a, b_shift = b;
  for (double& v : a_shift) v += 7.3;
  for (double& v : b_shift) v += 7.3;
  CHECK(rmse(a, b) == doctest::Approx(rmse(a_shift, b_shift)).epsilon(1e-12));

  CHECK_THROWS_AS(rmse(a, zero), ShapeError);
  CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), ShapeError);
}

TEST_CASE("horizon_rmse: definition cases") {
  Matrix pred(1, 4), target(1, 4);
  const HorizonMetrics perfect = horizon_rmse(pred, target);
  for (double v : perfect.per_horizon_rmse) CHECK(v == 0.0);
  CHECK(perfect.overall_rmse == 0.0);

  pred(0, 0) = 1.0;  // off by 1 at horizon 1 only
  const HorizonMetrics one = horizon_rmse(pred, target);
  CHECK(one.per_horizon_rmse[0] == 1.0);
  CHECK(one.per_horizon_rmse[1] == 0.0);
  CHECK(one.overall_rmse == doctest::Approx(std::sqrt(1.0 / 4.0)));

  Matrix bad(2, 3);
  CHECK_THROWS_AS(horizon_rmse(pred, bad), ShapeError);
}

TEST_CASE("horizon_rmse: brute-force oracle on random instances") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t windows = 1 + rng.next_below(12);
    const std::size_t horizons = 1 + rng.next_below(10);
    Matrix pred(windows, horizons), target(windows, horizons);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      pred.data()[i] = rng.next_range(-10.0, 10.0);
      target.data()[i] = rng.next_range(-10.0, 10.0);
    }
    const HorizonMetrics m = horizon_rmse(pred, target);

    for (std::size_t h = 0; h < horizons; ++h) {
      double sq = 0.0;
      for (std::size_t w = 0; w < windows; ++w) {
        const double d = pred(w, h) - target(w, h);
        sq += d * d;
      }
      REQUIRE(std::abs(m.per_horizon_rmse[h] -
                       std::sqrt(sq / static_cast<double>(windows))) < 1e-10);
    }
    // pooled overall equals the flattened-matrix RMSE
    double sq_all = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double d = pred.data()[i] - target.data()[i];
      sq_all += d * d;
    }
    REQUIRE(std::abs(m.overall_rmse - std::sqrt(sq_all / static_cast<double>(pred.size()))) <
            1e-10);
  }
}

TEST_CASE("confidence_interval: examples and oracle") {
  const std::vector<double> same{7.0, 7.0, 7.0};
  const ConfidenceInterval flat = confidence_interval(same);
  CHECK(flat.mean == 7.0);
  CHECK(flat.half_width_95 == 0.0);

  const std::vector<double> pair{4.0, 6.0};
  const ConfidenceInterval two = confidence_interval(pair);
  CHECK(two.mean == 5.0);
  CHECK(two.half_width_95 == 1.96 * std::sqrt(2.0) / std::sqrt(2.0));

  const std::vector<double> one{3.3};
  CHECK(confidence_interval(one).half_width_95 == 0.0);
  CHECK(confidence_interval(one).mean == 3.3);

  CHECK_THROWS_AS(confidence_interval(std::vector<double>{}), ShapeError);

  // spreadsheet-style oracle over 30 known samples
  Rng rng(4);
  std::vector<double> samples(30);
  for (double& v : samples) v = rng.next_range(0.0, 100.0);
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= 30.0;
  double sq = 0.0;
  for (double v : samples) sq += (v - mean) * (v - mean);
  const double s = std::sqrt(sq / 29.0);
  const double expected_half = 1.96 * s / std::sqrt(30.0);
  const ConfidenceInterval ci = confidence_interval(samples);
  CHECK(std::abs(ci.mean - mean) < 1e-10);
  CHECK(std::abs(ci.half_width_95 - expected_half) < 1e-10);
}
