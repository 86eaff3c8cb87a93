#pragma once

// Finite pointed sphere spaces: points on the unit sphere with an implicit base
// point at the origin. Squared distances are exact rationals, so the Gram
// matrix is exact and membership (strict positive definiteness, equivalently
// linear independence of the points) is decided without tolerances.

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fraisse/rational.hpp"

namespace fraisse {

/// Squared distance d^2 between two points of a sphere space.
struct SquaredDistance {
  Rational value;

  SquaredDistance() = default;
  explicit SquaredDistance(Rational v) : value(std::move(v)) {}
  SquaredDistance(long num, long den) : value(mpz_class(num), mpz_class(den)) { value.canonicalize(); }

  /// True iff 0 < d^2 < 4, the range of distinct non-antipodal unit vectors.
  bool in_open_range() const { return value > 0 && value < 4; }

  friend bool operator==(const SquaredDistance&, const SquaredDistance&) = default;
};

class SpaceDistances {
 public:
  SpaceDistances() = default;

  /// Validates symmetry, zero diagonal and off-diagonal entries in (0,4).
  /// Throws MalformedSpace otherwise.
  static SpaceDistances from_matrix(std::vector<std::string> labels, RationalMatrix sq_dist);

  /// Default labels "p0", "p1", ...
  static SpaceDistances from_matrix(RationalMatrix sq_dist);

  std::size_t size() const { return sq_.size(); }
  bool empty() const { return sq_.size() == 0; }
  const std::vector<std::string>& labels() const { return labels_; }
  const Rational& sq(std::size_t i, std::size_t j) const { return sq_(i, j); }
  const RationalMatrix& matrix() const { return sq_; }

  /// Principal sub-space on the given indices, in that order.
  SpaceDistances restrict(std::span<const std::size_t> idx) const;

  /// Appends one point with the given squared distances to the existing points.
  SpaceDistances with_point(std::string label, std::span<const Rational> sq_to_existing) const;

  friend bool operator==(const SpaceDistances& a, const SpaceDistances& b) {
    return a.labels_ == b.labels_ && a.sq_ == b.sq_;
  }

 private:
  std::vector<std::string> labels_;
  RationalMatrix sq_;
};

struct GramMatrix {
  RationalMatrix g;
  /// Exact LDL^T pivots, present only once the matrix has been certified.
  std::optional<std::vector<Rational>> pd_certificate;

  std::size_t size() const { return g.size(); }
};

/// First non-positive LDL^T pivot and the leading principal minor it closes.
struct Rejection {
  std::size_t pivot_index = 0;
  Rational leading_minor;
};

struct Certification {
  GramMatrix gram;
  std::optional<Rejection> rejection;

  bool is_member() const { return !rejection.has_value(); }
};

/// Exact unit lower-triangular L and pivots d with L diag(d) L^T = g, computed
/// without pivoting. Stops at the first pivot <= 0; `complete` tells whether
/// every pivot was positive.
struct LdltResult {
  RationalMatrix lower;
  std::vector<Rational> pivots;
  bool complete = false;
};

LdltResult ldlt_exact(const RationalMatrix& g);

/// g[i][j] = 1 - d^2/2 (polarization on the unit sphere).
GramMatrix gram_from_distances(const SpaceDistances& space);

/// Inverse of gram_from_distances: d^2 = 2 - 2 g.
RationalMatrix distances_from_gram(const RationalMatrix& g);

Certification certify_membership(const SpaceDistances& space);

/// Certifies a raw symmetric Gram matrix (entries need not come from a valid space).
Certification certify_gram(const RationalMatrix& g);

/// Certification for any unit-sphere distance matrix: symmetric, zero diagonal,
/// entries in [0,4]. Coincident or antipodal pairs yield a rejection rather
/// than MalformedSpace.
Certification certify_sphere_distances(const RationalMatrix& sq_dist);

/// Float coordinates of a certified space; each row is one point.
struct EmbeddedSpace {
  Eigen::MatrixXd coords;
  double tol = 1e-9;

  std::size_t size() const { return static_cast<std::size_t>(coords.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(coords.cols()); }
};

/// Cholesky rows of the float-converted exact Gram. Throws PreconditionError
/// for non-members and PrecisionError when double precision cannot reproduce
/// the space at `tol`.
EmbeddedSpace embed(const SpaceDistances& space, double tol = 1e-9);

/// Worst deviations of an embedding from the exact space it claims to realize.
struct EmbeddingError {
  double max_norm_error = 0.0;
  double max_sq_dist_error = 0.0;
  double min_cholesky_pivot = 0.0;
};

EmbeddingError embedding_error(const SpaceDistances& space, const EmbeddedSpace& emb);

/// Index correspondence domain[i] -> codomain[i] between two spaces.
struct PartialIsometry {
  std::vector<std::size_t> domain;
  std::vector<std::size_t> codomain;
};

/// True iff every squared distance is preserved exactly. Throws std::out_of_range
/// on bad indices and PreconditionError on unequal list lengths.
bool verify_isometry(const SpaceDistances& a, const SpaceDistances& b, const PartialIsometry& map);

}  // namespace fraisse
