#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fraisse {

using Rational = mpq_class;

/// Nearest double to an exact rational (round-half-even).
double to_double(const Rational& q);

/// Nearest multiple of 2^-bits to x, as an exact rational in lowest terms.
Rational snap_to_grid(double x, unsigned bits);

/// "p/q" or "p" textual form, used in reports and messages.
std::string to_string(const Rational& q);

/// Square matrix of exact rationals, row-major.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  explicit RationalMatrix(std::size_t n) : n_(n), a_(n * n, Rational(0)) {}

  static RationalMatrix identity(std::size_t n);

  std::size_t size() const { return n_; }
  Rational& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  bool is_symmetric() const;
  RationalMatrix principal(std::span<const std::size_t> idx) const;
  std::vector<double> to_doubles() const;

  friend bool operator==(const RationalMatrix& a, const RationalMatrix& b) {
    return a.n_ == b.n_ && a.a_ == b.a_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Rational> a_;
};

/// Solves a x = b exactly by Gaussian elimination with nonzero pivoting.
/// Throws PreconditionError when a is singular.
std::vector<Rational> solve_exact(const RationalMatrix& a, std::span<const Rational> b);

/// Exact determinant by rational Gaussian elimination.
Rational determinant_exact(const RationalMatrix& a);

}  // namespace fraisse
