#pragma once

#include <cstdint>
#include <vector>

#include "aqcast/layers.hpp"

namespace aqcast {

struct AdamHyper {
  double alpha = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
///   theta <- theta - alpha * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
/// State is owned by exactly one training trial; moment buffers mirror the
/// parameter blocks passed to attach().
class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamHyper hyper = {});

  /// Sizes the moment buffers against a parameter set. Must be called once
  /// before step(); re-attaching resets the state.
  void attach(const std::vector<ParamRef>& params);

  /// One update using each block's accumulated gradient.
  void step(const std::vector<ParamRef>& params);

  std::int64_t step_count() const { return t_; }
  const AdamHyper& hyper() const { return hyper_; }

 private:
  AdamHyper hyper_;
  std::vector<std::vector<double>> m_, v_;
  std::int64_t t_ = 0;
};

}  // namespace aqcast
