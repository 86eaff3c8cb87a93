#include "fraisse/metric_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fraisse/errors.hpp"
#include "fraisse/kernels.hpp"

namespace fraisse {

SpaceDistances SpaceDistances::from_matrix(std::vector<std::string> labels, RationalMatrix sq_dist) {
  const std::size_t n = sq_dist.size();
  if (labels.size() != n) throw MalformedSpace("label count does not match matrix size");
  for (std::size_t i = 0; i < n; ++i) {
    if (sq_dist(i, i) != 0) throw MalformedSpace("nonzero diagonal at " + std::to_string(i));
    for (std::size_t j = i + 1; j < n; ++j) {
      if (sq_dist(i, j) != sq_dist(j, i))
        throw MalformedSpace("asymmetric entry (" + std::to_string(i) + "," + std::to_string(j) + ")");
      if (sq_dist(i, j) <= 0 || sq_dist(i, j) >= 4)
        throw MalformedSpace("squared distance " + to_string(sq_dist(i, j)) + " at (" +
                             std::to_string(i) + "," + std::to_string(j) + ") outside (0,4)");
    }
  }
  SpaceDistances s;
  s.labels_ = std::move(labels);
  s.sq_ = std::move(sq_dist);
  return s;
}

Certification certify_sphere_distances(const RationalMatrix& sq_dist) {
  const std::size_t n = sq_dist.size();
  RationalMatrix g(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (sq_dist(i, i) != 0) throw MalformedSpace("nonzero diagonal at " + std::to_string(i));
    g(i, i) = 1;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (sq_dist(i, j) != sq_dist(j, i))
        throw MalformedSpace("asymmetric entry (" + std::to_string(i) + "," + std::to_string(j) + ")");
      if (sq_dist(i, j) < 0 || sq_dist(i, j) > 4)
        throw MalformedSpace("squared distance " + to_string(sq_dist(i, j)) + " outside [0,4]");
      g(i, j) = g(j, i) = 1 - sq_dist(i, j) / 2;
    }
  }
  return certify_gram(g);
}

SpaceDistances SpaceDistances::from_matrix(RationalMatrix sq_dist) {
  std::vector<std::string> labels(sq_dist.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = "p" + std::to_string(i);
  return from_matrix(std::move(labels), std::move(sq_dist));
}

SpaceDistances SpaceDistances::restrict(std::span<const std::size_t> idx) const {
  std::vector<std::string> labels;
  labels.reserve(idx.size());
  for (std::size_t i : idx) labels.push_back(labels_.at(i));
  SpaceDistances s;
  s.labels_ = std::move(labels);
  s.sq_ = sq_.principal(idx);
  return s;
}

SpaceDistances SpaceDistances::with_point(std::string label,
                                          std::span<const Rational> sq_to_existing) const {
  const std::size_t n = size();
  if (sq_to_existing.size() != n) throw PreconditionError("with_point: wrong distance count");
  RationalMatrix m(n + 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = sq_(i, j);
  for (std::size_t i = 0; i < n; ++i) m(i, n) = m(n, i) = sq_to_existing[i];
  auto labels = labels_;
  labels.push_back(std::move(label));
  return from_matrix(std::move(labels), std::move(m));
}

LdltResult ldlt_exact(const RationalMatrix& g) {
  const std::size_t n = g.size();
  LdltResult out;
  out.lower = RationalMatrix::identity(n);
  out.pivots.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Rational d = g(k, k);
    for (std::size_t m = 0; m < k; ++m) d -= out.lower(k, m) * out.lower(k, m) * out.pivots[m];
    out.pivots.push_back(d);
    if (d <= 0) return out;
    for (std::size_t i = k + 1; i < n; ++i) {
      Rational s = g(i, k);
      for (std::size_t m = 0; m < k; ++m) s -= out.lower(i, m) * out.lower(k, m) * out.pivots[m];
      out.lower(i, k) = s / d;
    }
  }
  out.complete = true;
  return out;
}

GramMatrix gram_from_distances(const SpaceDistances& space) {
  const std::size_t n = space.size();
  GramMatrix out{RationalMatrix(n), std::nullopt};
  const Rational half(1, 2);
  for (std::size_t i = 0; i < n; ++i) {
    out.g(i, i) = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const Rational& d = space.sq(i, j);
      if (d <= 0 || d >= 4) throw MalformedSpace("squared distance outside (0,4)");
      out.g(i, j) = 1 - d * half;
    }
  }
  return out;
}

RationalMatrix distances_from_gram(const RationalMatrix& g) {
  const std::size_t n = g.size();
  RationalMatrix d(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d(i, j) = i == j ? Rational(0) : Rational(2 - 2 * g(i, j));
  return d;
}

namespace {

// Same pivots as ldlt_exact, by fraction-free (Bareiss) elimination on the
// matrix scaled to integers: after step k the pivot entry is the leading
// minor M_k of the scaled matrix, and pivot k of g is M_k / (M_{k-1} * scale).
std::vector<Rational> pivots_fraction_free(const RationalMatrix& g) {
  const std::size_t n = g.size();
  mpz_class scale = 1;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), g(i, j).get_den_mpz_t());
  std::vector<mpz_class> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = g(i, j).get_num() * (scale / g(i, j).get_den());

  std::vector<Rational> pivots;
  pivots.reserve(n);
  mpz_class prev = 1;
  mpz_class t;
  for (std::size_t k = 0; k < n; ++k) {
    const mpz_class& akk = a[k * n + k];
    Rational d(akk, prev * scale);
    d.canonicalize();
    pivots.push_back(d);
    if (sgn(akk) <= 0) break;
    for (std::size_t i = k + 1; i < n; ++i) {
      const mpz_class& aik = a[i * n + k];
      for (std::size_t j = k + 1; j < n; ++j) {
        mpz_class& aij = a[i * n + j];
        t = akk * aij;
        t -= aik * a[k * n + j];
        mpz_divexact(aij.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
      }
    }
    prev = akk;
  }
  return pivots;
}

}  // namespace

Certification certify_gram(const RationalMatrix& g) {
  if (!g.is_symmetric()) throw MalformedSpace("certify_gram: matrix is not symmetric");
  Certification out{GramMatrix{g, std::nullopt}, std::nullopt};
  std::vector<Rational> pivots = pivots_fraction_free(g);
  if (pivots.empty() || pivots.back() > 0) {
    out.gram.pd_certificate = std::move(pivots);
    return out;
  }
  Rational minor = 1;
  for (const Rational& p : pivots) minor *= p;
  out.rejection = Rejection{pivots.size() - 1, minor};
  return out;
}

Certification certify_membership(const SpaceDistances& space) {
  return certify_gram(gram_from_distances(space).g);
}

EmbeddingError embedding_error(const SpaceDistances& space, const EmbeddedSpace& emb) {
  const std::size_t n = space.size();
  if (emb.size() != n) throw PreconditionError("embedding_error: point count mismatch");
  EmbeddingError err;
  if (n == 0) return err;
  const std::size_t d = emb.dim();
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = emb.coords;
  std::vector<double> sq(n * n), gram(n * n);
  std::span<const double> flat(rows.data(), n * d);
  kernels::pairwise_sq_dist(flat, n, flat, n, d, sq);
  kernels::gram_rows(flat, n, d, gram);
  for (std::size_t i = 0; i < n; ++i) {
    err.max_norm_error = std::max(err.max_norm_error, std::abs(std::sqrt(gram[i * n + i]) - 1.0));
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      err.max_sq_dist_error =
          std::max(err.max_sq_dist_error, std::abs(sq[i * n + j] - to_double(space.sq(i, j))));
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          gram.data(), n, n));
  if (llt.info() != Eigen::Success) {
    err.min_cholesky_pivot = 0.0;
  } else {
    const Eigen::VectorXd diag = Eigen::MatrixXd(llt.matrixL()).diagonal();
    err.min_cholesky_pivot = diag.array().square().minCoeff();
  }
  return err;
}

EmbeddedSpace embed(const SpaceDistances& space, double tol) {
  if (!(tol > 0)) throw PreconditionError("embed: tolerance must be positive");
  const std::size_t n = space.size();
  const Certification cert = certify_membership(space);
  if (!cert.is_member()) throw PreconditionError("embed: space is not a certified member");
  const std::vector<double> g = cert.gram.g.to_doubles();

  // Plain Cholesky; the exact matrix is PD, so a tiny pivot is a float artefact.
  constexpr double kPivotFloor = 1e-14;
  Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    double d = g[k * n + k];
    for (std::size_t m = 0; m < k; ++m) d -= lower(k, m) * lower(k, m);
    if (!(d > kPivotFloor))
      throw PrecisionError("embed: Cholesky pivot " + std::to_string(d) + " at row " +
                           std::to_string(k) + " below float threshold");
    const double diag = std::sqrt(d);
    lower(k, k) = diag;
    for (std::size_t i = k + 1; i < n; ++i) {
      double s = g[i * n + k];
      for (std::size_t m = 0; m < k; ++m) s -= lower(i, m) * lower(k, m);
      lower(i, k) = s / diag;
    }
  }
  EmbeddedSpace out{std::move(lower), tol};
  const EmbeddingError err = embedding_error(space, out);
  if (err.max_norm_error > tol || err.max_sq_dist_error > tol)
    throw PrecisionError("embed: round trip error exceeds tolerance");
  if (n > 0 && !(err.min_cholesky_pivot > tol))
    throw PrecisionError("embed: rows not numerically independent at tolerance");
  return out;
}

bool verify_isometry(const SpaceDistances& a, const SpaceDistances& b, const PartialIsometry& map) {
  if (map.domain.size() != map.codomain.size())
    throw PreconditionError("verify_isometry: index lists differ in length");
  for (std::size_t i : map.domain)
    if (i >= a.size()) throw std::out_of_range("verify_isometry: domain index out of range");
  for (std::size_t i : map.codomain)
    if (i >= b.size()) throw std::out_of_range("verify_isometry: codomain index out of range");
  const std::size_t m = map.domain.size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const bool same_a = map.domain[i] == map.domain[j];
      const bool same_b = map.codomain[i] == map.codomain[j];
      if (same_a != same_b) return false;
      if (!same_a && a.sq(map.domain[i], map.domain[j]) != b.sq(map.codomain[i], map.codomain[j]))
        return false;
    }
  return true;
}

}  // namespace fraisse
