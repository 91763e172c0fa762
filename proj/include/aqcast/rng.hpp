#pragma once

#include <cstdint>
#include <random>

namespace aqcast {

/// Seeded 64-bit generator behind all randomness in the project.
///
/// Draws go through the helpers below rather than std:: distributions, whose
/// output is implementation-defined; this keeps streams identical across
/// platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double next_range(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Uniform integer in [0, n), n > 0. Modulo reduction: the bias is
  /// negligible at the sizes used here and the stream stays simple.
  std::uint64_t next_below(std::uint64_t n) { return engine_() % n; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace aqcast
