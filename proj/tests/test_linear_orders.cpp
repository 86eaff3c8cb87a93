#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fraisse/errors.hpp"
#include "fraisse/linear_orders.hpp"
#include "support.hpp"

using namespace fraisse;
using namespace fraisse::testing;
using std::numbers::pi;

namespace {

// Relabels an ordering string through a 1-based position permutation.
std::string relabel(const std::string& ordering, const std::vector<int>& perm) {
  std::string out = ordering;
  for (char& c : out) c = static_cast<char>('0' + perm[static_cast<std::size_t>(c - '1')]);
  return out;
}

double trivariate_closed_form(double r12, double r13, double r23) {
  return 0.125 + (std::asin(r12) + std::asin(r13) + std::asin(r23)) / (4 * pi);
}

}  // namespace

TEST_CASE("orderings enumerate permutations") {
  CHECK(all_orderings(1) == std::vector<std::string>{"1"});
  CHECK(all_orderings(3) == std::vector<std::string>{"123", "132", "213", "231", "312", "321"});
  CHECK(all_orderings(5).size() == 120);
  CHECK(all_orderings(8).size() == 40320);
  CHECK_THROWS_AS(all_orderings(9), PreconditionError);
}

TEST_CASE("small cases") {
  const auto pt = GaussianModel::build(SpaceDistances::from_matrix(RationalMatrix(1)), 1);
  const std::vector<std::size_t> zero{0};
  const auto d1 = order_distribution(pt, zero, 1000);
  CHECK(d1.probs.at("1").value == 1.0);
  CHECK(ordering_prob_exact(pt, "1") == 1.0);
  const auto u1 = uniformity_test(d1);
  CHECK(u1.degenerate);
  CHECK(u1.statistic == 0.0);

  const auto pair = GaussianModel::build(uniform_space(2, q(1, 3)), 2);
  CHECK(ordering_prob_exact(pair, "12") == 0.5);
  CHECK(ordering_prob_exact(pair, "21") == 0.5);
  const auto d2 = order_distribution(pair, std::vector<std::size_t>{0, 1}, 200000);
  CHECK(std::abs(d2.probs.at("12").value - 0.5) < 3 * d2.probs.at("12").std_error);
  CHECK(full_support_check(d2, &pair).all_observed);
}

TEST_CASE("preconditions") {
  const auto big = GaussianModel::build(random_member(9, 1), 1);
  std::vector<std::size_t> nine(9);
  for (std::size_t i = 0; i < 9; ++i) nine[i] = i;
  CHECK_THROWS_AS(order_distribution(big, nine, 10), PreconditionError);
  const std::vector<std::size_t> five{0, 1, 2, 3, 4};
  CHECK_THROWS_AS(ordering_prob_exact(big, five, "12345"), PreconditionError);
  const std::vector<std::size_t> three{0, 1, 2};
  CHECK_THROWS_AS(ordering_prob_exact(big, three, "124"), PreconditionError);
  CHECK_THROWS_AS(uniformity_test(order_distribution(big, three, 20)), PreconditionError);
}

TEST_CASE("isoceles triangle") {
  const auto model = GaussianModel::build(isoceles(), 12);
  double total = 0;
  for (const auto& o : all_orderings(3)) total += ordering_prob_exact(model, o);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ordering_prob_exact(model, "132") == doctest::Approx(0.25));
  CHECK(ordering_prob_exact(model, "231") == doctest::Approx(0.25));
  CHECK(ordering_prob_exact(model, "123") == doctest::Approx(0.125));

  const std::vector<std::size_t> idx{0, 1, 2};
  const auto dist = order_distribution(model, idx, 1000000);
  CHECK_FALSE(dist.tie_flag);
  double sum = 0, var = 0;
  for (const auto& o : all_orderings(3)) {
    const auto& e = dist.probs.at(o);
    CHECK(std::abs(e.value - ordering_prob_exact(model, o)) <= 3 * e.std_error);
    sum += e.value;
    var += e.std_error * e.std_error;
  }
  CHECK(std::abs(sum - 1) <= 3 * std::sqrt(var) + 1e-12);
  // swapping points 1 and 2 is an isometry
  for (const auto& o : all_orderings(3)) {
    const auto& a = dist.probs.at(o);
    const auto& b = dist.probs.at(relabel(o, {2, 1, 3}));
    CHECK(std::abs(a.value - b.value) <= 3 * std::hypot(a.std_error, b.std_error));
  }
  const auto test = uniformity_test(dist);
  CHECK(test.p_value < 1e-3);
  CHECK(test.dof == 5);
  const auto support = full_support_check(dist, &model);
  CHECK(support.all_observed);
  CHECK(support.all_exact_positive);
  CHECK(support.min_exact == doctest::Approx(0.125));
}

TEST_CASE("exchangeable tuples give uniform orderings") {
  const auto eq = GaussianModel::build(uniform_space(3, q(1)), 3);
  for (const auto& o : all_orderings(3)) CHECK(ordering_prob_exact(eq, o) == doctest::Approx(1.0 / 6));
  const auto d3 = order_distribution(eq, std::vector<std::size_t>{0, 1, 2}, 1000000);
  for (const auto& [o, e] : d3.probs) CHECK(std::abs(e.value - 1.0 / 6) <= 3 * e.std_error);
  CHECK(uniformity_test(d3).p_value > 0.01);
  CHECK(full_support_check(d3, &eq).all_observed);

  const auto eq4 = GaussianModel::build(uniform_space(4, q(3, 2)), 4);
  const auto d4 = order_distribution(eq4, std::vector<std::size_t>{0, 1, 2, 3}, 600000);
  for (const auto& [o, e] : d4.probs) CHECK(std::abs(e.value - 1.0 / 24) <= 3 * e.std_error);
}

TEST_CASE("trivariate quadrature against the closed form") {
  const double cases[][3] = {{0, 0, 0}, {0.5, 0.5, 0.5}, {0.3, -0.2, 0.1}, {-0.4, -0.4, -0.1},
                             {0.9, 0.8, 0.75}, {-0.5, 0.25, 0.5}};
  for (const auto& c : cases)
    CHECK(std::abs(trivariate_orthant_quadrature(c[0], c[1], c[2]) - trivariate_closed_form(c[0], c[1], c[2])) <
          1e-6);
}

TEST_CASE("four points through the quadrature path") {
  const auto s = random_member(4, 6);
  const auto model = GaussianModel::build(s, 8);
  double total = 0;
  for (const auto& o : all_orderings(4)) {
    const double p = ordering_prob_exact(model, o);
    CHECK(p > 0);
    total += p;
  }
  CHECK(std::abs(total - 1) < 1e-6);
  const auto dist = order_distribution(model, std::vector<std::size_t>{0, 1, 2, 3}, 600000);
  for (const auto& o : all_orderings(4))
    CHECK(std::abs(dist.probs.at(o).value - ordering_prob_exact(model, o)) <= 3.5 * dist.probs.at(o).std_error);
}

TEST_CASE("symmetry transport on a square") {
  // four points, consecutive ones at d^2 = 1, opposite ones at d^2 = 3/2
  const auto sq = space_of({{0, 1, q(3, 2), 1}, {1, 0, 1, q(3, 2)}, {q(3, 2), 1, 0, 1}, {1, q(3, 2), 1, 0}});
  REQUIRE(certify_membership(sq).is_member());
  const auto model = GaussianModel::build(sq, 10);
  const std::vector<int> rot{2, 3, 4, 1};
  REQUIRE(verify_isometry(sq, sq, {{0, 1, 2, 3}, {1, 2, 3, 0}}));
  const auto dist = order_distribution(model, std::vector<std::size_t>{0, 1, 2, 3}, 600000);
  for (const auto& o : all_orderings(4)) {
    CHECK(ordering_prob_exact(model, o) == doctest::Approx(ordering_prob_exact(model, relabel(o, rot))).epsilon(1e-6));
    const auto& a = dist.probs.at(o);
    const auto& b = dist.probs.at(relabel(o, rot));
    CHECK(std::abs(a.value - b.value) <= 3.5 * std::hypot(a.std_error, b.std_error));
  }
}

TEST_CASE("subsets of a larger model") {
  const auto s = random_member(6, 3);
  const auto model = GaussianModel::build(s, 4);
  const std::vector<std::size_t> idx{4, 1, 5};
  const auto dist = order_distribution(model, idx, 400000);
  for (const auto& o : all_orderings(3))
    CHECK(std::abs(dist.probs.at(o).value - ordering_prob_exact(model, idx, o)) <= 3.5 * dist.probs.at(o).std_error);
}
