#include "fraisse/rng.hpp"

#include <cmath>
#include <numbers>

namespace fraisse {

double counter_normal(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t base = index & ~std::uint64_t{1};
  const double u1 = counter_uniform(seed, base);
  const double u2 = counter_uniform(seed, base + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  return (index & 1) ? r * std::sin(a) : r * std::cos(a);
}

}  // namespace fraisse
