#pragma once

#include <cstdint>
#include <limits>

namespace coarray {

/// SplitMix64 output function; a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

/// Combines a parent seed and an index into a child seed. For a fixed parent
/// the map index -> child is injective.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

/// Counter-based generator: output i is mix64(key + (i+1) * golden). Any
/// (seed, stream) pair yields the same sequence regardless of which thread or
/// in which order streams are consumed. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace coarray
