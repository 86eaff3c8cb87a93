#pragma once

// Density made effective: float squared distances produced by geometry are
// snapped to dyadic rationals k/2^b, the snapped configuration is re-certified
// exactly, and on failure b doubles (up to `retries` times).

#include <optional>
#include <string>
#include <type_traits>
#include <utility>

#include "fraisse/errors.hpp"
#include "fraisse/rational.hpp"

namespace fraisse {

struct SnapPolicy {
  unsigned denom_bits = 32;
  unsigned retries = 3;
};

/// Nearest k/2^bits to x, or nullopt if that falls outside (0,4).
inline std::optional<Rational> snap_sq_dist(double x, unsigned bits) {
  Rational q = snap_to_grid(x, bits);
  if (q <= 0 || q >= 4) return std::nullopt;
  return q;
}

/// Calls attempt(bits) for bits = b, 2b, 4b, ... until it returns a value.
template <class Attempt>
auto snap_with_retries(const SnapPolicy& policy, Attempt&& attempt, const char* what)
    -> typename std::invoke_result_t<Attempt&, unsigned>::value_type {
  unsigned bits = policy.denom_bits;
  for (unsigned round = 0; round <= policy.retries; ++round, bits *= 2) {
    if (auto got = attempt(bits)) return std::move(*got);
  }
  throw SearchFailure(std::string(what) + ": snapping failed after " +
                      std::to_string(policy.retries) + " retries");
}

}  // namespace fraisse
