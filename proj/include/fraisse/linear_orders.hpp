#pragma once

// The random linear order obtained by sorting the Gaussian values at k points.
// An ordering is written as the positions (1-based, within the chosen k-tuple)
// listed from smallest to largest value: "132" means eta_1 < eta_3 < eta_2.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fraisse/gaussian_field.hpp"

namespace fraisse {

constexpr std::size_t kMaxOrderPoints = 8;

/// All orderings of k positions in lexicographic order ("123", "132", ...).
std::vector<std::string> all_orderings(std::size_t k);

struct OrderDistribution {
  std::size_t k = 0;
  std::vector<std::size_t> indices;           // model indices of the k-tuple
  std::map<std::string, Estimate> probs;      // every one of the k! orderings
  std::map<std::string, std::size_t> counts;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  std::size_t ties = 0;
  bool tie_flag = false;                      // more than 10 ties per 10^6 draws
};

OrderDistribution order_distribution(const GaussianModel& model, std::span<const std::size_t> indices,
                                     std::size_t n_samples);

/// Exact probability of one ordering: k <= 3 in closed form, k = 4 by adaptive
/// quadrature (absolute error ~1e-6 or better). Throws PreconditionError for k > 4.
double ordering_prob_exact(const GaussianModel& model, std::span<const std::size_t> indices,
                           const std::string& ordering);

/// Same with indices 0..n-1 of the model.
double ordering_prob_exact(const GaussianModel& model, const std::string& ordering);

/// P(Z > 0) for a centered trivariate normal with correlation matrix r.
double trivariate_orthant_quadrature(const double r12, const double r13, const double r23);

struct UniformityTest {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t dof = 0;
  bool degenerate = false;
};

/// Chi-square goodness of fit against the uniform law on k! cells.
UniformityTest uniformity_test(const OrderDistribution& dist);

struct SupportReport {
  bool all_observed = false;
  std::vector<std::string> missing;
  std::size_t min_count = 0;
  bool exact_available = false;
  bool all_exact_positive = false;
  double min_exact = 0.0;
};

/// Every ordering observed; exact probabilities checked too when a model is
/// given and k <= 4.
SupportReport full_support_check(const OrderDistribution& dist, const GaussianModel* model = nullptr);

}  // namespace fraisse
