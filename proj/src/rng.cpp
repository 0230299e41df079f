#include "coarray/rng.hpp"

namespace coarray {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x)
{
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index)
{
  // parent is whitened first so nearby parents do not produce overlapping
  // arithmetic progressions; index * golden (odd) keeps the map injective.
  return mix64(mix64(parent) + (index + 1) * kGolden);
}

CounterRng::result_type CounterRng::operator()()
{
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

}  // namespace coarray
