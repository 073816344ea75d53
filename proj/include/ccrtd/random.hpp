#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace ccrtd {

/// Counter-keyed random stream. A stream is identified by (seed, index) so
/// that row i of any sampled matrix is reproducible without generating rows
/// 0..i-1, and parallel generation is bit-identical to serial generation.
///
/// The state mixing is splitmix64 and the generator is xoshiro256**; it models
/// UniformRandomBitGenerator so it composes with <random> distributions.
class RowStream {
 public:
  using result_type = std::uint64_t;

  RowStream(std::uint64_t seed, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double in [0, 1).
  double uniform();

  /// Standard normal deviate.
  double normal() { return normal_(*this); }

 private:
  std::uint64_t s_[4];
  std::normal_distribution<double> normal_;
};

}  // namespace ccrtd
