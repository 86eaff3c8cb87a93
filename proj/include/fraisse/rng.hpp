#pragma once

#include <cstdint>

namespace fraisse {

// Counter-based generator: the value at (seed, counter) is a pure function of
// both, so disjoint counter ranges can be consumed by different workers and
// the merged stream is independent of how the work was split.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t counter) {
  return splitmix64(splitmix64(seed) ^ splitmix64(counter ^ 0xD1B54A32D192ED03ULL));
}

/// Uniform double in the open interval (0, 1).
constexpr double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  return (static_cast<double>(counter_bits(seed, counter) >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal at a given index; Box-Muller over the pair (2*(i/2), 2*(i/2)+1).
double counter_normal(std::uint64_t seed, std::uint64_t index);

/// Sequential view over the counter stream, used by the randomized searches.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t start = 0) : seed_(seed), counter_(start) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t position() const { return counter_; }

  std::uint64_t next_u64() { return counter_bits(seed_, counter_++); }
  double uniform() { return counter_uniform(seed_, counter_++); }
  double normal() {
    // consume counters in pairs so every draw is a fresh Box-Muller pair
    if (counter_ % 2 != 0) ++counter_;
    const double z = counter_normal(seed_, counter_);
    counter_ += 2;
    return z;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace fraisse
