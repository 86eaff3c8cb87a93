#include "fraisse/linear_orders.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "fraisse/errors.hpp"

namespace fraisse {

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t factorial(std::size_t k) {
  std::size_t f = 1;
  for (std::size_t i = 2; i <= k; ++i) f *= i;
  return f;
}

std::vector<std::size_t> parse_ordering(const std::string& ordering, std::size_t k) {
  if (ordering.size() != k) throw PreconditionError("ordering length must equal k");
  std::vector<std::size_t> pos;
  std::vector<bool> seen(k, false);
  for (char c : ordering) {
    const int p = c - '1';
    if (p < 0 || static_cast<std::size_t>(p) >= k || seen[static_cast<std::size_t>(p)])
      throw PreconditionError("ordering is not a permutation of 1..k: " + ordering);
    seen[static_cast<std::size_t>(p)] = true;
    pos.push_back(static_cast<std::size_t>(p));
  }
  return pos;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Lower bivariate normal CDF via Plackett's integral over the correlation.
double bivariate_cdf(double h, double k, double rho) {
  if (rho == 0.0) return normal_cdf(h) * normal_cdf(k);
  auto f = [h, k](double r) {
    const double one = 1.0 - r * r;
    return std::exp(-(h * h - 2.0 * h * k * r + k * k) / (2.0 * one)) / std::sqrt(one);
  };
  double err = 0.0;
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, rho, 15, 1e-12, &err);
  return normal_cdf(h) * normal_cdf(k) + integral / (2.0 * kPi);
}

}  // namespace

std::vector<std::string> all_orderings(std::size_t k) {
  if (k > kMaxOrderPoints) throw PreconditionError("at most 8 points per ordering");
  std::string s;
  for (std::size_t i = 0; i < k; ++i) s.push_back(static_cast<char>('1' + i));
  std::vector<std::string> out;
  do {
    out.push_back(s);
  } while (std::next_permutation(s.begin(), s.end()));
  return out;
}

OrderDistribution order_distribution(const GaussianModel& model, std::span<const std::size_t> indices,
                                     std::size_t n_samples) {
  const std::size_t k = indices.size();
  if (k == 0 || k > kMaxOrderPoints) throw PreconditionError("order_distribution: need 1 <= k <= 8");
  for (std::size_t i : indices)
    if (i >= model.size()) throw std::out_of_range("order_distribution: index out of range");

  OrderDistribution dist;
  dist.k = k;
  dist.indices.assign(indices.begin(), indices.end());
  dist.n_samples = n_samples;
  dist.seed = model.seed();
  for (const auto& o : all_orderings(k)) dist.counts[o] = 0;

  std::vector<std::size_t> pos(k);
  std::string key(k, '1');
  for_each_block(model, n_samples, [&](const SampleMatrix& blk) {
    for (std::size_t r = 0; r < blk.rows; ++r) {
      std::iota(pos.begin(), pos.end(), 0);
      const auto row = blk.row(r);
      std::stable_sort(pos.begin(), pos.end(),
                       [&](std::size_t a, std::size_t b) { return row[indices[a]] < row[indices[b]]; });
      for (std::size_t i = 0; i + 1 < k; ++i)
        if (row[indices[pos[i]]] == row[indices[pos[i + 1]]]) ++dist.ties;
      for (std::size_t i = 0; i < k; ++i) key[i] = static_cast<char>('1' + pos[i]);
      ++dist.counts[key];
    }
  });
  for (const auto& [o, c] : dist.counts) {
    Estimate e;
    e.n_samples = n_samples;
    e.seed = model.seed();
    if (n_samples > 0) {
      e.value = static_cast<double>(c) / static_cast<double>(n_samples);
      e.std_error = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(n_samples));
    }
    dist.probs[o] = e;
  }
  dist.tie_flag = static_cast<double>(dist.ties) > 10.0 * static_cast<double>(n_samples) / 1e6;
  return dist;
}

double trivariate_orthant_quadrature(const double r12, const double r13, const double r23) {
  const double s2 = std::sqrt(1.0 - r12 * r12);
  const double s3 = std::sqrt(1.0 - r13 * r13);
  const double rc = (r23 - r12 * r13) / (s2 * s3);
  // condition on the first coordinate and integrate its density over (0, inf)
  auto f = [&](double t) {
    const double phi = std::exp(-0.5 * t * t) / std::sqrt(2.0 * kPi);
    return phi * bivariate_cdf(r12 * t / s2, r13 * t / s3, rc);
  };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-11, &err);
}

double ordering_prob_exact(const GaussianModel& model, std::span<const std::size_t> indices,
                           const std::string& ordering) {
  const std::size_t k = indices.size();
  if (k == 0 || k > 4) throw PreconditionError("ordering_prob_exact: supported for 1 <= k <= 4");
  for (std::size_t i : indices)
    if (i >= model.size()) throw std::out_of_range("ordering_prob_exact: index out of range");
  const std::vector<std::size_t> pos = parse_ordering(ordering, k);
  if (k == 1) return 1.0;
  // a centered scalar difference is positive with probability 1/2
  if (k == 2) return 0.5;

  // differences D_i = eta(a_{i+1}) - eta(a_i), covariance computed exactly
  std::vector<std::size_t> a(k);
  for (std::size_t i = 0; i < k; ++i) a[i] = indices[pos[i]];
  const RationalMatrix& s = model.sigma();
  const std::size_t m = k - 1;
  RationalMatrix cov(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      cov(i, j) = s(a[i + 1], a[j + 1]) - s(a[i + 1], a[j]) - s(a[i], a[j + 1]) + s(a[i], a[j]);
  auto corr = [&](std::size_t i, std::size_t j) {
    return to_double(cov(i, j)) / std::sqrt(to_double(cov(i, i)) * to_double(cov(j, j)));
  };
  if (k == 3) return 0.25 + std::asin(corr(0, 1)) / (2.0 * kPi);
  return trivariate_orthant_quadrature(corr(0, 1), corr(0, 2), corr(1, 2));
}

double ordering_prob_exact(const GaussianModel& model, const std::string& ordering) {
  std::vector<std::size_t> idx(model.size());
  std::iota(idx.begin(), idx.end(), 0);
  return ordering_prob_exact(model, idx, ordering);
}

UniformityTest uniformity_test(const OrderDistribution& dist) {
  UniformityTest t;
  const std::size_t cells = factorial(dist.k);
  if (cells == 1) {
    t.degenerate = true;
    return t;
  }
  const double expected = static_cast<double>(dist.n_samples) / static_cast<double>(cells);
  if (expected < 5.0) throw PreconditionError("uniformity_test: expected count per cell below 5");
  for (const auto& [o, c] : dist.counts) {
    const double d = static_cast<double>(c) - expected;
    t.statistic += d * d / expected;
  }
  t.dof = cells - 1;
  const boost::math::chi_squared chi(static_cast<double>(t.dof));
  t.p_value = boost::math::cdf(boost::math::complement(chi, t.statistic));
  return t;
}

SupportReport full_support_check(const OrderDistribution& dist, const GaussianModel* model) {
  SupportReport rep;
  rep.min_count = dist.n_samples;
  for (const auto& [o, c] : dist.counts) {
    rep.min_count = std::min(rep.min_count, c);
    if (c == 0) rep.missing.push_back(o);
  }
  rep.all_observed = rep.missing.empty();
  if (model && dist.k <= 4) {
    rep.exact_available = true;
    rep.min_exact = 1.0;
    for (const auto& [o, c] : dist.counts)
      rep.min_exact = std::min(rep.min_exact, ordering_prob_exact(*model, dist.indices, o));
    rep.all_exact_positive = rep.min_exact > 0.0;
  }
  return rep;
}

}  // namespace fraisse
