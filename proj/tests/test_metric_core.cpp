#include <doctest.h>

#include "fraisse/errors.hpp"
#include "support.hpp"

using namespace fraisse;
using namespace fraisse::testing;

TEST_CASE("rational helpers") {
  CHECK(to_double(q(1, 3)) == 1.0 / 3.0);
  CHECK(to_string(q(6, 4)) == "3/2");
  CHECK(to_string(q(-2)) == "-2");
  CHECK(snap_to_grid(0.75, 32) == q(3, 4));
  CHECK(snap_to_grid(1.0 / 3.0, 4) == q(5, 16));
  CHECK(snap_to_grid(-0.5, 8) == q(-1, 2));

  RationalMatrix a(2);
  a(0, 0) = 2, a(0, 1) = 1, a(1, 0) = 1, a(1, 1) = 3;
  CHECK(determinant_exact(a) == 5);
  const std::vector<Rational> b{q(1), q(2)};
  const auto x = solve_exact(a, b);
  CHECK(x[0] == q(1, 5));
  CHECK(x[1] == q(3, 5));
  RationalMatrix sing(2);
  sing(0, 0) = sing(0, 1) = sing(1, 0) = sing(1, 1) = 1;
  CHECK(determinant_exact(sing) == 0);
  CHECK_THROWS_AS(solve_exact(sing, b), PreconditionError);
}

TEST_CASE("space validation") {
  RationalMatrix m(2);
  m(0, 1) = q(1), m(1, 0) = q(3, 2);
  CHECK_THROWS_AS(SpaceDistances::from_matrix(m), MalformedSpace);
  m(1, 0) = q(4);
  m(0, 1) = q(4);
  CHECK_THROWS_AS(SpaceDistances::from_matrix(m), MalformedSpace);
  m(0, 1) = m(1, 0) = 0;
  CHECK_THROWS_AS(SpaceDistances::from_matrix(m), MalformedSpace);
  m(0, 1) = m(1, 0) = 1;
  m(0, 0) = q(1, 2);
  CHECK_THROWS_AS(SpaceDistances::from_matrix(m), MalformedSpace);
  CHECK(SquaredDistance(7, 2).in_open_range());
  CHECK_FALSE(SquaredDistance(4, 1).in_open_range());
}

TEST_CASE("gram by polarization") {
  const auto g2 = gram_from_distances(uniform_space(2, q(2))).g;
  CHECK(g2 == RationalMatrix::identity(2));
  CHECK(gram_from_distances(uniform_space(2, q(1))).g(0, 1) == q(1, 2));
  const auto g3 = gram_from_distances(uniform_space(3, q(1))).g;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(g3(i, j) == (i == j ? q(1) : q(1, 2)));
}

TEST_CASE("polarization round trip") {
  CounterRng rng(11);
  for (int t = 0; t < 50; ++t) {
    const auto s = random_rational_space(5, rng, 97);
    CHECK(distances_from_gram(gram_from_distances(s).g) == s.matrix());
  }
}

TEST_CASE("certificates for the basic examples") {
  const auto eq = certify_membership(uniform_space(3, q(1)));
  REQUIRE(eq.is_member());
  CHECK(*eq.gram.pd_certificate == std::vector<Rational>{q(1), q(3, 4), q(2, 3)});

  const auto orth = certify_membership(uniform_space(2, q(2)));
  REQUIRE(orth.is_member());
  CHECK(*orth.gram.pd_certificate == std::vector<Rational>{q(1), q(1)});

  RationalMatrix anti(2);
  anti(0, 1) = anti(1, 0) = 4;
  const auto rej = certify_sphere_distances(anti);
  REQUIRE_FALSE(rej.is_member());
  CHECK(rej.rejection->pivot_index == 1);
  CHECK(rej.rejection->leading_minor == 0);

  // regular tetrahedron: <.,.> = -1/3, vertices sum to zero
  const auto simplex = certify_membership(uniform_space(4, q(8, 3)));
  REQUIRE_FALSE(simplex.is_member());
  CHECK(simplex.rejection->pivot_index == 3);
  CHECK(simplex.rejection->leading_minor == 0);
  CHECK(certify_membership(uniform_space(3, q(8, 3))).is_member());
}

TEST_CASE("certificate reconstructs the gram exactly") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = random_member(6, seed);
    const auto g = gram_from_distances(s).g;
    const auto f = ldlt_exact(g);
    REQUIRE(f.complete);
    const std::size_t n = g.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        Rational acc = 0;
        for (std::size_t k = 0; k < n; ++k) acc += f.lower(i, k) * f.pivots[k] * f.lower(j, k);
        CHECK(acc == g(i, j));
      }
  }
}

TEST_CASE("rejection minor is the leading principal determinant") {
  CounterRng rng(5);
  int rejected = 0;
  for (int t = 0; t < 100; ++t) {
    const auto s = random_rational_space(6, rng, 16);
    const auto c = certify_membership(s);
    if (c.is_member()) continue;
    ++rejected;
    std::vector<std::size_t> lead(c.rejection->pivot_index + 1);
    for (std::size_t i = 0; i < lead.size(); ++i) lead[i] = i;
    CHECK(c.rejection->leading_minor == determinant_exact(c.gram.g.principal(lead)));
    CHECK(c.rejection->leading_minor <= 0);
  }
  CHECK(rejected > 0);
}

TEST_CASE("exact verdict agrees with float eigenvalues") {
  CounterRng rng(99);
  int compared = 0;
  for (int t = 0; t < 300; ++t) {
    const auto s = random_rational_space(2 + t % 6, rng, 64);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_doubles(s));
    const double lo = es.eigenvalues().minCoeff();
    if (std::abs(lo) <= 1e-6) continue;
    ++compared;
    CHECK(certify_membership(s).is_member() == (lo > 0));
  }
  CHECK(compared > 200);
}

TEST_CASE("membership is hereditary") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto s = random_member(7, seed);
    REQUIRE(certify_membership(s).is_member());
    const std::vector<std::size_t> subsets[] = {{0}, {1, 3}, {0, 2, 4, 6}, {6, 5, 1}};
    for (const auto& idx : subsets) CHECK(certify_membership(s.restrict(idx)).is_member());
  }
}

TEST_CASE("embedding") {
  const auto one = embed(SpaceDistances::from_matrix(RationalMatrix(1)));
  CHECK(one.coords.rows() == 1);
  CHECK(one.coords(0, 0) == doctest::Approx(1.0));

  const auto orth = embed(uniform_space(2, q(2)));
  CHECK(std::abs(orth.coords.row(0).dot(orth.coords.row(1))) < 1e-12);
  CHECK(std::abs((orth.coords.row(0) - orth.coords.row(1)).squaredNorm() - 2) < 1e-9);

  const auto eq = embed(uniform_space(3, q(1)));
  const Eigen::MatrixXd g = eq.coords * eq.coords.transpose();
  CHECK((g - gram_doubles(uniform_space(3, q(1)))).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(embed(uniform_space(4, q(8, 3))), PreconditionError);

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto s = random_member(12, seed);
    const auto e = embedding_error(s, embed(s));
    CHECK(e.max_sq_dist_error < 1e-12);
    CHECK(e.max_norm_error < 1e-12);
    CHECK(e.min_cholesky_pivot > 0);
  }
}

TEST_CASE("nearly degenerate spaces raise a precision error") {
  // c is within 1e-14 of 1/sqrt(2), so the third pivot 1 - 2c^2 is tiny but positive
  const Rational c = q(70710678118654, 100000000000000);
  RationalMatrix g = RationalMatrix::identity(3);
  g(0, 2) = g(2, 0) = c;
  g(1, 2) = g(2, 1) = c;
  REQUIRE(1 - 2 * c * c > 0);
  REQUIRE(1 - 2 * c * c < q(1, 1000000000));
  const auto tight = SpaceDistances::from_matrix(distances_from_gram(g));
  CHECK(certify_membership(tight).is_member());
  CHECK_THROWS_AS(embed(tight, 1e-9), PrecisionError);
}

TEST_CASE("isometry verification") {
  const auto iso = isoceles();
  CHECK(verify_isometry(iso, iso, {{0, 1, 2}, {1, 0, 2}}));
  CHECK_FALSE(verify_isometry(iso, iso, {{0, 1, 2}, {0, 2, 1}}));
  CHECK(verify_isometry(iso, uniform_space(2, q(1)), {{0, 2}, {0, 1}}));
  CHECK_THROWS_AS(verify_isometry(iso, iso, {{0, 5}, {0, 1}}), std::out_of_range);
  CHECK_THROWS_AS(verify_isometry(iso, iso, {{0, 1}, {0}}), PreconditionError);
}

TEST_CASE("fraction-free certification matches the rational factorization") {
  CounterRng rng(123);
  for (int t = 0; t < 200; ++t) {
    const auto s = t % 2 ? random_member(1 + t % 9, 300 + t) : random_rational_space(1 + t % 7, rng, 1 + t);
    const auto g = gram_from_distances(s).g;
    const auto f = ldlt_exact(g);
    const auto c = certify_gram(g);
    CHECK(c.is_member() == f.complete);
    if (c.is_member()) {
      CHECK(*c.gram.pd_certificate == f.pivots);
    } else {
      CHECK(c.rejection->pivot_index == f.pivots.size() - 1);
    }
  }
}
