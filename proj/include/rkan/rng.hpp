#pragma once

#include <cstdint>
#include <random>

namespace rkan {

// Named sub-streams of a run seed. Keeping streams separate guarantees the
// documented invariants (train/test draws disjoint, init independent of data).
enum class Stream : std::uint64_t {
  TrainData = 0,
  TestData = 1,
  Init = 2,
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// Deterministic RNG. mt19937_64 output is pinned by the standard, and the
// uniform mapping below is our own, so sequences are stable across platforms
// and standard-library versions (std::uniform_real_distribution is not).
class Rng {
 public:
  Rng(std::uint64_t seed, Stream stream)
      : eng_(detail::splitmix64(detail::splitmix64(seed) ^
                                static_cast<std::uint64_t>(stream))) {}

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace rkan
