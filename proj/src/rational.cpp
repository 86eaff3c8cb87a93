#include "fraisse/rational.hpp"

#include <mpfr.h>

#include <cmath>

#include "fraisse/errors.hpp"

namespace fraisse {

double to_double(const Rational& q) {
  mpfr_t tmp;
  mpfr_init2(tmp, 53);
  mpfr_set_q(tmp, q.get_mpq_t(), MPFR_RNDN);
  const double out = mpfr_get_d(tmp, MPFR_RNDN);
  mpfr_clear(tmp);
  return out;
}

Rational snap_to_grid(double x, unsigned bits) {
  if (!std::isfinite(x)) throw PreconditionError("snap_to_grid: non-finite value");
  // x * 2^bits is exact in rationals; round half away from zero.
  mpz_class scale = 1;
  scale <<= bits;
  Rational scaled = Rational(x) * Rational(scale);
  mpz_class num = scaled.get_num();
  const mpz_class& den = scaled.get_den();
  mpz_class q, r;
  mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  if (2 * r >= den) q += 1;
  Rational out(q, scale);
  out.canonicalize();
  return out;
}

std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

RationalMatrix RationalMatrix::identity(std::size_t n) {
  RationalMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

bool RationalMatrix::is_symmetric() const {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if ((*this)(i, j) != (*this)(j, i)) return false;
  return true;
}

RationalMatrix RationalMatrix::principal(std::span<const std::size_t> idx) const {
  RationalMatrix out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = (*this)(idx[i], idx[j]);
  return out;
}

std::vector<double> RationalMatrix::to_doubles() const {
  std::vector<double> out(a_.size());
  for (std::size_t k = 0; k < a_.size(); ++k) out[k] = to_double(a_[k]);
  return out;
}

namespace {

// Forward elimination with partial (nonzero) pivoting; returns false if singular.
bool eliminate(RationalMatrix& a, std::vector<Rational>* rhs, Rational* det) {
  const std::size_t n = a.size();
  Rational sign = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    while (p < n && a(p, k) == 0) ++p;
    if (p == n) return false;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      if (rhs) std::swap((*rhs)[k], (*rhs)[p]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      if (a(i, k) == 0) continue;
      Rational f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      if (rhs) (*rhs)[i] -= f * (*rhs)[k];
    }
  }
  if (det) {
    Rational d = sign;
    for (std::size_t k = 0; k < n; ++k) d *= a(k, k);
    *det = d;
  }
  return true;
}

}  // namespace

std::vector<Rational> solve_exact(const RationalMatrix& a, std::span<const Rational> b) {
  if (b.size() != a.size()) throw PreconditionError("solve_exact: dimension mismatch");
  RationalMatrix work = a;
  std::vector<Rational> rhs(b.begin(), b.end());
  if (!eliminate(work, &rhs, nullptr)) throw PreconditionError("solve_exact: singular matrix");
  const std::size_t n = a.size();
  std::vector<Rational> x(n);
  for (std::size_t i = n; i-- > 0;) {
    Rational s = rhs[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= work(i, j) * x[j];
    x[i] = s / work(i, i);
  }
  return x;
}

Rational determinant_exact(const RationalMatrix& a) {
  RationalMatrix work = a;
  Rational det;
  if (!eliminate(work, nullptr, &det)) return Rational(0);
  return det;
}

}  // namespace fraisse
