#include <doctest.h>

#include <numeric>

#include "fraisse/errors.hpp"
#include "fraisse/fraisse_builder.hpp"
#include "fraisse/io.hpp"
#include "support.hpp"

using namespace fraisse;
using namespace fraisse::testing;

namespace {

std::vector<std::size_t> iota_n(std::size_t n, std::size_t from = 0) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), from);
  return v;
}

AmalgamProblem random_problem(std::uint64_t seed) {
  CounterRng rng(seed);
  const std::size_t a = rng.next_u64() % 4;
  const std::size_t l = 1 + rng.next_u64() % 3;
  const std::size_t r = 1 + rng.next_u64() % 3;
  const SpaceDistances base = random_extension(SpaceDistances{}, a, rng);
  AmalgamProblem p;
  p.left = random_extension(base, l, rng);
  p.right = random_extension(base, r, rng);
  p.common_left = iota_n(a);
  // put the common part of `right` at the end to exercise the index maps
  std::vector<std::size_t> order = iota_n(r, a);
  for (std::size_t i = 0; i < a; ++i) order.push_back(i);
  p.right = p.right.restrict(order);
  p.common_right = iota_n(a, r);
  return p;
}

}  // namespace

TEST_CASE("degenerate amalgam over everything") {
  const auto a = random_member(3, 4);
  const auto out = amalgamate({a, a, iota_n(3), iota_n(3)});
  CHECK(out.space.size() == 3);
  CHECK(out.space.matrix() == a.matrix());
}

TEST_CASE("free amalgam of two single points is orthogonal") {
  const auto pt = SpaceDistances::from_matrix(RationalMatrix(1));
  const auto out = amalgamate({pt, pt, {}, {}});
  REQUIRE(out.space.size() == 2);
  CHECK(out.space.sq(0, 1) == 2);
  CHECK(out.space.labels()[1] == "p0'");
}

TEST_CASE("free amalgam over one common point") {
  const auto pair = uniform_space(2, q(1));  // c = 0, new point = 1
  const auto out = amalgamate({pair, pair, {0}, {0}});
  REQUIRE(out.space.size() == 3);
  CHECK(out.space.sq(1, 2) == q(3, 2));
  CHECK(out.right_map == std::vector<std::size_t>{0, 2});
}

TEST_CASE("amalgam preconditions") {
  const auto a = uniform_space(2, q(1));
  const auto b = uniform_space(2, q(2));
  CHECK_THROWS_AS(amalgamate({a, b, {0, 1}, {0, 1}}), PreconditionError);
  CHECK_THROWS_AS(amalgamate({a, b, {0}, {0, 1}}), PreconditionError);
}

TEST_CASE("random amalgams restrict exactly and stay strong") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto p = random_problem(seed);
    const auto out = amalgamate(p);
    REQUIRE(certify_membership(out.space).is_member());
    REQUIRE(out.certificate.pd_certificate.has_value());
    REQUIRE(out.space.restrict(out.left_map).matrix() == p.left.matrix());
    REQUIRE(out.space.restrict(out.right_map).matrix() == p.right.matrix());
    REQUIRE(out.space.size() == p.left.size() + p.right.size() - p.common_left.size());
    for (std::size_t i = 0; i < out.space.size(); ++i)
      for (std::size_t j = i + 1; j < out.space.size(); ++j) REQUIRE(out.space.sq(i, j) > 0);
  }
}

TEST_CASE("random extension") {
  CounterRng rng(3);
  const auto base = random_member(4, 8);
  CHECK(random_extension(base, 0, rng).matrix() == base.matrix());
  CHECK(random_extension(SpaceDistances{}, 1, rng).size() == 1);

  CounterRng r1(42), r2(42);
  const auto a = random_extension(SpaceDistances{}, 2, r1);
  const auto b = random_extension(SpaceDistances{}, 2, r2);
  CHECK(io::canonical(io::space_to_json(a)) == io::canonical(io::space_to_json(b)));
  CHECK(certify_membership(a).is_member());

  const auto grown = random_extension(base, 3, rng);
  CHECK(grown.restrict(iota_n(4)).matrix() == base.matrix());
  CHECK(certify_membership(grown).is_member());
}

TEST_CASE("one point extension witnesses") {
  const auto base = random_member(4, 5);
  const std::vector<Rational> orth(4, q(2));
  const auto w = one_point_extension_witness(base, orth);
  CHECK(w.index == 4);
  CHECK(w.extended.restrict(iota_n(4)).matrix() == base.matrix());
  CHECK(w.certificate.pd_certificate.has_value());

  std::vector<Rational> dup(4);
  for (std::size_t i = 0; i < 4; ++i) dup[i] = base.sq(1, i);
  dup[1] = 0;
  try {
    one_point_extension_witness(base, dup);
    FAIL("coincident point accepted");
  } catch (const UnrealizableType& e) {
    CHECK(e.witness().pivot_index == 4);
    CHECK(e.witness().leading_minor == 0);
  }

  const auto pair = uniform_space(2, q(2));
  const std::vector<Rational> ones{q(1), q(1)};
  const auto w2 = one_point_extension_witness(pair, ones);
  CHECK(*w2.certificate.pd_certificate == std::vector<Rational>{q(1), q(1), q(1, 2)});

  const std::vector<Rational> bad{q(1, 100), q(1, 100)};
  CHECK_THROWS_AS(one_point_extension_witness(pair, bad), UnrealizableType);
  const std::vector<Rational> short_list{q(1)};
  CHECK_THROWS_AS(one_point_extension_witness(pair, short_list), PreconditionError);
}

TEST_CASE("transitivity witnesses") {
  const auto s = random_member(5, 1);
  const auto t = random_member(2, 2);
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = 0; b < 5; ++b) CHECK(verify_isometry(s, s, check_transitivity_witness(a, b, s)));
  const auto id = check_transitivity_witness(2, 2, s);
  CHECK(id.domain == id.codomain);
  CHECK(verify_isometry(s, t, check_transitivity_witness(3, s, 1, t)));
}

TEST_CASE("no algebraicity witnesses") {
  const auto s = random_member(5, 31);
  CounterRng rng(1);
  const std::vector<std::size_t> fixed{0, 1, 2, 3};
  const auto all = no_algebraicity_witnesses(s, fixed, 4, 3, rng);
  REQUIRE(all.size() == 3);
  for (const auto& w : all) {
    CHECK(w.sq_dist_to_x > 0);
    CHECK(w.certificate.pd_certificate.has_value());
    for (std::size_t f : fixed) CHECK(w.extended.sq(w.index, f) == s.sq(4, f));
  }
  CHECK(all[0].extended.matrix() != all[1].extended.matrix());

  const auto free = no_algebraicity_witnesses(s, {}, 0, 3, rng);
  CHECK(free.size() == 3);
  CHECK(no_algebraicity_witnesses(s, {}, 2, 1, rng).size() == 1);
  CHECK_THROWS_AS(no_algebraicity_witnesses(s, fixed, 2, 1, rng), PreconditionError);
}

TEST_CASE("generic chains") {
  const auto a = grow_chain(SpaceDistances{}, 6, 2, 99);
  const auto b = grow_chain(SpaceDistances{}, 6, 2, 99);
  REQUIRE(a.stages.size() == 6);
  CHECK(chain_is_coherent(a));
  CHECK(a.stages.back().size() == 10);
  CHECK(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.stages.size(); ++i)
    CHECK(io::canonical(io::space_to_json(a.stages[i])) == io::canonical(io::space_to_json(b.stages[i])));

  auto broken = a;
  broken.stages[2] = random_member(broken.stages[2].size(), 5);
  CHECK_FALSE(chain_is_coherent(broken));

  const auto other = grow_chain(SpaceDistances{}, 6, 2, 100);
  CHECK(other.stages.back().matrix() != a.stages.back().matrix());
}
