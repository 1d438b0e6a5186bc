#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>

namespace terramod {

inline std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// mt19937_64 with portable mappings to doubles and indices, so a seed gives
/// the same stream on every standard library.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream `stream_id` of a run seeded with `seed`.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id)
  {
    return Rng(splitmix64(seed ^ splitmix64(stream_id)));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool coin() { return (engine_() >> 63) != 0; }

  /// Uniform in [0, n), unbiased. n must be > 0.
  std::size_t index(std::size_t n)
  {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do
      x = engine_();
    while (x >= limit);
    return static_cast<std::size_t>(x % bound);
  }

private:
  std::mt19937_64 engine_;
};

} // namespace terramod
