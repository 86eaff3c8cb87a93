#include "fraisse/fraisse_builder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "fraisse/errors.hpp"
#include "fraisse/type_geometry.hpp"

namespace fraisse {

namespace {

void require_member(const SpaceDistances& s, const char* what) {
  if (!certify_membership(s).is_member())
    throw PreconditionError(std::string(what) + ": input space is not a certified member");
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

Amalgam amalgamate(const AmalgamProblem& p) {
  const std::size_t nl = p.left.size();
  const std::size_t nr = p.right.size();
  const std::size_t na = p.common_left.size();
  if (p.common_right.size() != na) throw PreconditionError("amalgamate: common index lists differ in length");
  if (std::set<std::size_t>(p.common_left.begin(), p.common_left.end()).size() != na ||
      std::set<std::size_t>(p.common_right.begin(), p.common_right.end()).size() != na)
    throw PreconditionError("amalgamate: repeated index in common part");
  if (!verify_isometry(p.left, p.right, {p.common_left, p.common_right}))
    throw PreconditionError("amalgamate: identified subspaces are not isometric");
  require_member(p.left, "amalgamate");
  require_member(p.right, "amalgamate");

  const RationalMatrix gl = gram_from_distances(p.left).g;
  const RationalMatrix gr = gram_from_distances(p.right).g;
  const RationalMatrix ga = gl.principal(p.common_left);

  Amalgam out;
  out.left_map.resize(nl);
  std::iota(out.left_map.begin(), out.left_map.end(), 0);
  out.right_map.assign(nr, 0);
  std::vector<std::size_t> right_only;
  for (std::size_t j = 0; j < nr; ++j) {
    auto it = std::find(p.common_right.begin(), p.common_right.end(), j);
    if (it != p.common_right.end()) {
      out.right_map[j] = p.common_left[static_cast<std::size_t>(it - p.common_right.begin())];
    } else {
      out.right_map[j] = nl + right_only.size();
      right_only.push_back(j);
    }
  }

  const std::size_t n = nl + right_only.size();
  RationalMatrix g(n);
  for (std::size_t i = 0; i < nl; ++i)
    for (std::size_t j = 0; j < nl; ++j) g(i, j) = gl(i, j);
  for (std::size_t a = 0; a < right_only.size(); ++a)
    for (std::size_t b = 0; b < right_only.size(); ++b)
      g(nl + a, nl + b) = gr(right_only[a], right_only[b]);

  // <x, y> for left x, right-only y: projection of y onto span(A) written in the
  // basis A, paired with x. For x in A this reproduces the right-side value.
  for (std::size_t b = 0; b < right_only.size(); ++b) {
    const std::size_t y = right_only[b];
    std::vector<Rational> rhs(na);
    for (std::size_t k = 0; k < na; ++k) rhs[k] = gr(p.common_right[k], y);
    const std::vector<Rational> w = na == 0 ? std::vector<Rational>{} : solve_exact(ga, rhs);
    for (std::size_t x = 0; x < nl; ++x) {
      Rational ip = 0;
      for (std::size_t k = 0; k < na; ++k) ip += gl(x, p.common_left[k]) * w[k];
      g(x, nl + b) = g(nl + b, x) = ip;
    }
  }

  auto labels = p.left.labels();
  for (std::size_t j : right_only) {
    std::string label = p.right.labels()[j];
    while (std::find(labels.begin(), labels.end(), label) != labels.end()) label += "'";
    labels.push_back(std::move(label));
  }
  out.space = SpaceDistances::from_matrix(std::move(labels), distances_from_gram(g));
  Certification cert = certify_membership(out.space);
  if (!cert.is_member()) throw SearchFailure("amalgamate: free amalgam failed certification");
  out.certificate = std::move(cert.gram);
  return out;
}

namespace {

std::optional<SpaceDistances> try_extension(const SpaceDistances& space, const RowMatrix& pts,
                                            unsigned bits) {
  const std::size_t n = space.size();
  const std::size_t total = static_cast<std::size_t>(pts.rows());
  RationalMatrix sq(total);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sq(i, j) = space.sq(i, j);
  for (std::size_t i = n; i < total; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const auto s = snap_sq_dist((pts.row(i) - pts.row(j)).squaredNorm(), bits);
      if (!s) return std::nullopt;
      sq(i, j) = sq(j, i) = *s;
    }
  auto labels = space.labels();
  for (std::size_t i = n; i < total; ++i) {
    std::string label = "p" + std::to_string(i);
    while (std::find(labels.begin(), labels.end(), label) != labels.end()) label += "'";
    labels.push_back(std::move(label));
  }
  SpaceDistances out = SpaceDistances::from_matrix(std::move(labels), std::move(sq));
  if (!certify_membership(out).is_member()) return std::nullopt;
  return out;
}

SpaceDistances random_extension_impl(const SpaceDistances& space, std::size_t k, CounterRng& rng,
                                     const SnapPolicy& policy, unsigned* bits_used) {
  require_member(space, "random_extension");
  if (bits_used) *bits_used = 0;
  if (k == 0) return space;
  const std::size_t n = space.size();
  const std::size_t dim = n + k;
  RowMatrix pts = RowMatrix::Zero(n + k, dim);
  if (n > 0) pts.topLeftCorner(n, n) = embed(space).coords;

  constexpr int kResamples = 8;
  for (int round = 0; round < kResamples; ++round) {
    for (std::size_t i = n; i < n + k; ++i) {
      Eigen::VectorXd v(dim);
      for (std::size_t c = 0; c < dim; ++c) v[c] = rng.normal();
      pts.row(i) = v.normalized().transpose();
    }
    unsigned bits = policy.denom_bits;
    for (unsigned r = 0; r <= policy.retries; ++r, bits *= 2) {
      if (auto got = try_extension(space, pts, bits)) {
        if (bits_used) *bits_used = bits;
        return *got;
      }
    }
  }
  throw SearchFailure("random_extension: snapping failed for every resample");
}

}  // namespace

SpaceDistances random_extension(const SpaceDistances& space, std::size_t k, CounterRng& rng,
                                const SnapPolicy& policy) {
  return random_extension_impl(space, k, rng, policy, nullptr);
}

ExtensionWitness one_point_extension_witness(const SpaceDistances& space,
                                             std::span<const Rational> target_dists) {
  const std::size_t n = space.size();
  if (target_dists.size() != n) throw PreconditionError("extension: one distance per existing point");
  for (const Rational& d : target_dists)
    if (d < 0 || d > 4) throw MalformedSpace("extension: squared distance outside [0,4]");
  const RationalMatrix g = gram_from_distances(space).g;
  RationalMatrix ext(n + 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) ext(i, j) = g(i, j);
  ext(n, n) = 1;
  const Rational half(1, 2);
  for (std::size_t i = 0; i < n; ++i) ext(i, n) = ext(n, i) = 1 - target_dists[i] * half;
  Certification cert = certify_gram(ext);
  if (!cert.is_member())
    throw UnrealizableType("extension: prescribed type is not realizable (pivot " +
                               std::to_string(cert.rejection->pivot_index) + " = minor " +
                               to_string(cert.rejection->leading_minor) + ")",
                           *cert.rejection);
  std::string label = "x";
  while (std::find(space.labels().begin(), space.labels().end(), label) != space.labels().end())
    label += "'";
  ExtensionWitness out;
  out.extended = space.with_point(label, target_dists);
  out.index = n;
  out.certificate = std::move(cert.gram);
  return out;
}

PartialIsometry check_transitivity_witness(std::size_t a_idx, std::size_t b_idx,
                                           const SpaceDistances& space) {
  return check_transitivity_witness(a_idx, space, b_idx, space);
}

PartialIsometry check_transitivity_witness(std::size_t a_idx, const SpaceDistances& a_space,
                                           std::size_t b_idx, const SpaceDistances& b_space) {
  if (a_idx >= a_space.size() || b_idx >= b_space.size())
    throw std::out_of_range("check_transitivity_witness: index out of range");
  return PartialIsometry{{a_idx}, {b_idx}};
}

std::vector<AlgebraicityWitness> no_algebraicity_witnesses(const SpaceDistances& space,
                                                           std::span<const std::size_t> fixed,
                                                           std::size_t x_idx, std::size_t m,
                                                           CounterRng& rng,
                                                           const SnapPolicy& policy) {
  const std::size_t n = space.size();
  if (x_idx >= n) throw std::out_of_range("no_algebraicity_witnesses: x index out of range");
  for (std::size_t f : fixed) {
    if (f >= n) throw std::out_of_range("no_algebraicity_witnesses: fixed index out of range");
    if (f == x_idx) throw PreconditionError("no_algebraicity_witnesses: x must not be fixed");
  }
  require_member(space, "no_algebraicity_witnesses");

  std::vector<Rational> type(fixed.size());
  for (std::size_t i = 0; i < fixed.size(); ++i) type[i] = space.sq(x_idx, fixed[i]);
  const TypeSphere ts = type_sphere(space.restrict(fixed), type);

  const std::size_t dim = n + 1;
  RowMatrix pts = RowMatrix::Zero(n, dim);
  pts.leftCols(n) = embed(space).coords;
  Eigen::MatrixXd fixed_cols(dim, fixed.size());
  for (std::size_t i = 0; i < fixed.size(); ++i) fixed_cols.col(i) = pts.row(fixed[i]).transpose();
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(dim, dim);
  if (!fixed.empty()) {
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(fixed_cols);
    q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, dim);
  }
  const Eigen::MatrixXd span_basis = q.leftCols(fixed.size());
  const Eigen::MatrixXd complement = q.rightCols(dim - fixed.size());
  const Eigen::VectorXd x = pts.row(x_idx).transpose();
  const Eigen::VectorXd center = span_basis * (span_basis.transpose() * x);
  const double rho = std::sqrt(ts.radius_sq);

  std::vector<AlgebraicityWitness> out;
  std::vector<Eigen::VectorXd> used;
  constexpr std::size_t kAttemptsPerWitness = 64;
  for (std::size_t w = 0; w < m; ++w) {
    bool found = false;
    for (std::size_t attempt = 0; attempt < kAttemptsPerWitness && !found; ++attempt) {
      Eigen::VectorXd coeff(complement.cols());
      for (Eigen::Index c = 0; c < coeff.size(); ++c) coeff[c] = rng.normal();
      const Eigen::VectorXd z = center + rho * (complement * coeff.normalized());
      bool fresh = (z - x).norm() > 1e-6;
      for (const auto& u : used) fresh = fresh && (z - u).norm() > 1e-6;
      if (!fresh) continue;

      auto snap = [&](unsigned bits) -> std::optional<AlgebraicityWitness> {
        std::vector<Rational> dists(n);
        for (std::size_t i = 0; i < n; ++i) {
          auto it = std::find(fixed.begin(), fixed.end(), i);
          if (it != fixed.end()) {
            dists[i] = type[static_cast<std::size_t>(it - fixed.begin())];
          } else {
            const auto s = snap_sq_dist((z - pts.row(i).transpose()).squaredNorm(), bits);
            if (!s) return std::nullopt;
            dists[i] = *s;
          }
        }
        std::string label = "x_" + std::to_string(w);
        SpaceDistances ext = space.with_point(label, dists);
        Certification cert = certify_membership(ext);
        if (!cert.is_member()) return std::nullopt;
        AlgebraicityWitness wit;
        wit.extended = std::move(ext);
        wit.index = n;
        wit.certificate = std::move(cert.gram);
        wit.sq_dist_to_x = dists[x_idx];
        return wit;
      };
      try {
        out.push_back(snap_with_retries(policy, snap, "no_algebraicity_witnesses"));
        used.push_back(z);
        found = true;
      } catch (const SearchFailure&) {
      }
    }
    if (!found) throw SearchFailure("no_algebraicity_witnesses: could not place a new realization");
  }
  return out;
}

GenericChain grow_chain(const SpaceDistances& start, std::size_t stage_count, std::size_t per_stage,
                        std::uint64_t seed, const SnapPolicy& policy) {
  require_member(start, "grow_chain");
  GenericChain chain;
  chain.seed = seed;
  chain.policy = policy;
  chain.stages.push_back(start);
  CounterRng rng(seed);
  for (std::size_t s = 1; s < stage_count; ++s) {
    ExtensionRecord rec;
    rec.stage = s;
    rec.points_added = per_stage;
    rec.rng_position = rng.position();
    chain.stages.push_back(random_extension_impl(chain.stages.back(), per_stage, rng, policy,
                                                 &rec.denom_bits));
    chain.log.push_back(rec);
  }
  return chain;
}

bool chain_is_coherent(const GenericChain& chain) {
  for (std::size_t s = 0; s < chain.stages.size(); ++s) {
    if (!certify_membership(chain.stages[s]).is_member()) return false;
    if (s + 1 < chain.stages.size()) {
      const SpaceDistances& cur = chain.stages[s];
      const SpaceDistances& next = chain.stages[s + 1];
      if (next.size() < cur.size()) return false;
      std::vector<std::size_t> idx(cur.size());
      std::iota(idx.begin(), idx.end(), 0);
      if (!(next.restrict(idx) == cur)) return false;
    }
  }
  return true;
}

}  // namespace fraisse
