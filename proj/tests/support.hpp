#pragma once

#include <Eigen/Dense>

#include "fraisse/fraisse_builder.hpp"
#include "fraisse/metric_core.hpp"
#include "fraisse/rng.hpp"

namespace fraisse::testing {

inline Rational q(long num, long den = 1) {
  Rational r{mpz_class(num), mpz_class(den)};
  r.canonicalize();
  return r;
}

/// Every pair at the same squared distance.
inline SpaceDistances uniform_space(std::size_t n, const Rational& d2) {
  RationalMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = i == j ? Rational(0) : d2;
  return SpaceDistances::from_matrix(std::move(m));
}

inline SpaceDistances space_of(std::initializer_list<std::initializer_list<Rational>> rows) {
  RationalMatrix m(rows.size());
  std::size_t i = 0;
  for (const auto& r : rows) {
    std::size_t j = 0;
    for (const auto& v : r) m(i, j++) = v;
    ++i;
  }
  return SpaceDistances::from_matrix(std::move(m));
}

inline SpaceDistances isoceles() { return space_of({{0, 2, 1}, {2, 0, 1}, {1, 1, 0}}); }

/// Certified member with n random points.
inline SpaceDistances random_member(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  return random_extension(SpaceDistances{}, n, rng);
}

/// Squared distances k/den with k uniform in 1..4*den-1; usually not a member for larger n.
inline SpaceDistances random_rational_space(std::size_t n, CounterRng& rng, long den) {
  RationalMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const long k = 1 + static_cast<long>(rng.next_u64() % static_cast<std::uint64_t>(4 * den - 1));
      m(i, j) = m(j, i) = q(k, den);
    }
  return SpaceDistances::from_matrix(std::move(m));
}

inline Eigen::MatrixXd gram_doubles(const SpaceDistances& s) {
  const auto n = static_cast<Eigen::Index>(s.size());
  const std::vector<double> v = gram_from_distances(s).g.to_doubles();
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      v.data(), n, n);
}

}  // namespace fraisse::testing

namespace fraisse::testing {

/// A random base C of size n and the squared distances of one more random point.
struct TypeFixture {
  SpaceDistances base;
  std::vector<Rational> dists;
};

inline TypeFixture random_type_fixture(std::size_t n, std::uint64_t seed) {
  const SpaceDistances ext = random_member(n + 1, seed);
  std::vector<std::size_t> first(n);
  for (std::size_t i = 0; i < n; ++i) first[i] = i;
  std::vector<Rational> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = ext.sq(n, i);
  return {ext.restrict(first), std::move(d)};
}

}  // namespace fraisse::testing
