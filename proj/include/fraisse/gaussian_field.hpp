#pragma once

// Finite marginals of the centered Gaussian field indexed by the points of a
// sphere space, with covariance equal to the exact Gram matrix.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fraisse/kernels.hpp"
#include "fraisse/metric_core.hpp"

namespace fraisse {

/// Every Monte Carlo number travels with its standard error and provenance.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

/// Row-major sample block; row r is one draw of the whole field marginal.
struct SampleMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

class GaussianModel {
 public:
  /// Throws PreconditionError for non-members, PrecisionError when the float
  /// factor does not reproduce sigma to 1e-10.
  static GaussianModel build(const SpaceDistances& space, std::uint64_t seed);

  const SpaceDistances& space() const { return space_; }
  const RationalMatrix& sigma() const { return sigma_; }
  /// Lower-triangular factor, row-major n*n.
  const std::vector<double>& chol() const { return chol_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return space_.size(); }

 private:
  SpaceDistances space_;
  RationalMatrix sigma_;
  std::vector<double> chol_;
  std::uint64_t seed_ = 0;
};

inline GaussianModel build_model(const SpaceDistances& space, std::uint64_t seed) {
  return GaussianModel::build(space, seed);
}

struct SampleOptions {
  std::uint64_t first_row = 0;  // draws are indexed; row r uses normals (first_row + r)*n + j
  unsigned workers = 0;         // 0: hardware concurrency
  kernels::Isa isa = kernels::active_isa();
};

SampleMatrix sample(const GaussianModel& model, std::size_t count, const SampleOptions& opts = {});

/// Streams `count` draws in fixed-size blocks; the concatenation equals sample(model, count).
void for_each_block(const GaussianModel& model, std::size_t count,
                    const std::function<void(const SampleMatrix&)>& fn,
                    const SampleOptions& opts = {}, std::size_t block_rows = 1 << 16);

struct InvarianceReport {
  bool exact_sigma_equal = false;
  double energy_statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_per_group = 0;
  std::size_t permutations = 0;
};

/// g must be a self-isometry of the model's space covering every point.
InvarianceReport invariance_check(const GaussianModel& model, const PartialIsometry& g,
                                  std::size_t n_per_group = 400, std::size_t permutations = 199);

struct NonproductWitness {
  std::size_t i = 0;
  std::size_t j = 0;
  Rational exact_correlation;
  Estimate empirical;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Pair with the largest |exact correlation|; nullopt when every pair is orthogonal.
std::optional<NonproductWitness> nonproduct_witness(const GaussianModel& model,
                                                    std::size_t samples = 100000);

struct NearOrthogonalCopy {
  SpaceDistances copy;
  SpaceDistances combined;   // original points 0..n-1, copy n..2n-1
  PartialIsometry map;       // i -> n + i inside `combined`
  Rational cross_scale;      // <x_i, z_j> = cross_scale * <x_i, x_j>
  GramMatrix certificate;
};

/// Exact copy z_j = c x_j + sqrt(1-c^2) w_j with w an orthogonal copy and
/// c = 1/k (c = 0 for k = 1). Cross inner products are c times the Gram.
NearOrthogonalCopy near_orthogonal_copy(const SpaceDistances& space, std::size_t k);
NearOrthogonalCopy near_orthogonal_copy_scaled(const SpaceDistances& space, const Rational& c);

enum class Side { Less, Greater };

struct ThresholdConstraint {
  std::size_t index = 0;
  Side side = Side::Greater;
  Rational threshold;
};

/// Conjunction of one-coordinate threshold constraints.
struct CylinderEvent {
  std::vector<ThresholdConstraint> constraints;

  std::vector<std::size_t> point_indices() const;
  /// Evaluates on row[offset + index].
  bool contains(std::span<const double> row, std::size_t offset = 0) const;
};

/// P(X > 0, Y > 0) for a standard bivariate normal with correlation c.
double sheppard_orthant(double c);

/// KL( N(0, joint) || N(0, product) ); trace and determinant ratio are exact.
double gaussian_kl_exact(const RationalMatrix& joint, const RationalMatrix& product);

inline double pinsker_bound(double kl) { return std::sqrt(kl / 2.0); }

/// Total variation between two centered bivariate normals by midpoint rule on
/// [-half_width, half_width]^2.
double tv_bivariate_grid(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b,
                         double half_width = 8.0, std::size_t cells = 800);

struct MixingRow {
  std::size_t k = 0;
  Rational cross_scale;
  Estimate joint;    // mu(B ∩ g_k B)
  Estimate single;   // mu(B)
  Estimate product;  // mu(B)^2
  double kl = 0.0;
  double tv_bound = 0.0;
};

struct MixingReport {
  std::vector<MixingRow> rows;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
};

MixingReport mixing_experiment(const SpaceDistances& space, const CylinderEvent& event,
                               std::span<const std::size_t> k_values, std::size_t samples,
                               std::uint64_t seed);

using SamplePredicate = std::function<bool(std::span<const double>)>;

struct CylinderApproximation {
  CylinderEvent event;
  Estimate sym_diff;  // mu(A △ B)
  bool reached = false;
};

/// Greedy threshold-cylinder search for mu(A △ B) <= epsilon on a fixed sample.
CylinderApproximation cylinder_approximation_demo(const GaussianModel& model,
                                                  const SamplePredicate& a, double epsilon,
                                                  std::size_t samples = 200000);

/// Empirical terms of the approximation argument for one copy g_k.
struct ErgodicityChain {
  double mu_a = 0.0;
  double mu_b = 0.0;
  double joint_a = 0.0;        // mu(A ∩ gA)
  double joint_b = 0.0;        // mu(B ∩ gB)
  double sym_diff = 0.0;       // mu(A △ B)
  double sym_diff_image = 0.0; // mu(gA △ gB)
  double discrepancy = 0.0;    // |mu(A ∩ gA) - mu(A)^2|
  double mixing_remainder = 0.0;
  double chain_bound = 0.0;    // |mu(A)^2-mu(B)^2| + mu(A△B) + mu(gA△gB) + remainder
  double four_eps_bound = 0.0; // 4 max(mu(A△B), mu(gA△gB)) + remainder
  std::size_t n_samples = 0;

  bool holds() const {
    constexpr double kRound = 1e-12;
    return discrepancy <= chain_bound + kRound && chain_bound <= four_eps_bound + kRound;
  }
};

ErgodicityChain ergodicity_chain(const SpaceDistances& space, const SamplePredicate& a,
                                 const CylinderEvent& b, std::size_t k, std::size_t samples,
                                 std::uint64_t seed);

}  // namespace fraisse
