#include "doctest.h"

#include <cmath>

#include "mec/catalog.hpp"
#include "mec/error.hpp"
#include "mec/groupoid.hpp"

using namespace mec;
namespace cat = mec::catalog;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::vector<GroupoidPtr> all_groupoids() {
  const Space R = cat::real_line();
  const Space pt = Space::point();
  const cat::Puncture p0{vec({0.0}), 1e-3};
  std::vector<GroupoidPtr> out{
      cat::unit_groupoid(R),
      cat::pair(R),
      cat::pair(Space({Patch({CoordKind::Angle, CoordKind::Line}, "S1xR")})),
      cat::group_bundle(R, {cat::GroupKind::Finite, 2}),
      cat::group_bundle(R, {cat::GroupKind::Finite, 3}, p0),
      cat::group_bundle(R, {cat::GroupKind::Circle, 1}),
      cat::group_bundle(pt, {cat::GroupKind::Vector, 2}),
      cat::action(0, false),
      cat::action(0, true),
      cat::action(3, false),
      cat::pullback(cat::pair(R), 1),
      cat::pullback(cat::group_bundle(pt, {cat::GroupKind::Circle, 1}), 1),
      cat::pullback(cat::pair(R), 1, cat::Puncture{vec({0.0, 0.0}), 1e-3}),
      cat::trivial_family(R, cat::action(0, false)),
      cat::trivial_family(R, cat::pair(cat::real_line("F"))),
      cat::product_with_manifold(cat::pair(R), Space::euclidean(1, "P")),
      cat::disjoint_union(cat::group_bundle(R, {cat::GroupKind::Finite, 2}),
                          cat::group_bundle(R, {cat::GroupKind::Finite, 2}, p0)),
  };
  out.push_back(cat::with_object_puncture(cat::trivial_family(R, cat::pair(cat::real_line("F"))),
                                          cat::Puncture{vec({0.0, 0.0}), 1e-3}));
  return out;
}

}  // namespace

TEST_CASE("every catalog groupoid satisfies the axioms") {
  const Tolerances tol;
  for (const auto& g : all_groupoids()) {
    CAPTURE(g->name);
    const Report r = check_axioms(*g, 200, 11, tol);
    CHECK(r.pass);
    CHECK(r.worst_residual < 1e-9);
  }
}

TEST_CASE("analytic structure Jacobians agree with finite differences") {
  const Tolerances tol;
  for (const auto& g : all_groupoids()) {
    CAPTURE(g->name);
    const Report r = check_jacobians(*g, 50, 5, tol);
    CHECK(r.pass);
    CHECK(r.samples > 0);
  }
}

TEST_CASE("pair groupoid multiplication") {
  const auto G = cat::pair(cat::real_line());
  const Point g{0, vec({1.0, 2.0})};
  const Point h{0, vec({2.0, 5.0})};
  const Point gh = G->multiply(g, h);
  CHECK(gh.coords[0] == doctest::Approx(1.0));
  CHECK(gh.coords[1] == doctest::Approx(5.0));
}

TEST_CASE("Z2 bundle adds fibrewise") {
  const auto G = cat::group_bundle(cat::real_line(), {cat::GroupKind::Finite, 2});
  CHECK(G->arrows.size() == 2);
  const Point one{1, vec({0.3})};
  CHECK(G->multiply(one, one).patch == 0);
  CHECK(G->multiply(Point{0, vec({0.3})}, one).patch == 1);
}

TEST_CASE("pullback of the circle group over a point") {
  const auto G = cat::pullback(cat::group_bundle(Space::point(), {cat::GroupKind::Circle, 1}), 1);
  const Point g{0, vec({0.5, 1.0, -2.0})};
  const Point h{0, vec({-2.0, 2.5, 3.0})};
  const Point gh = G->multiply(g, h);
  CHECK(gh.coords[0] == doctest::Approx(0.5));
  CHECK(gh.coords[1] == doctest::Approx(3.5));
  CHECK(gh.coords[2] == doctest::Approx(3.0));
}

TEST_CASE("corrupted multiplication is detected") {
  const auto G = with_corrupted_mul(cat::pair(cat::real_line()), 1e-3);
  const Report r = check_axioms(*G, 100, 3, Tolerances{});
  CHECK_FALSE(r.pass);
  CHECK(r.worst_residual > 5e-4);
  CHECK(r.worst_residual < 1e-2);
}

TEST_CASE("morphism identities") {
  const Tolerances tol;
  const auto ms = {cat::identity(cat::pair(cat::real_line())), cat::action_projection(0, false),
                   cat::action_projection(2, false), cat::luca(),
                   cat::pullback_projection(cat::pair(cat::real_line()), 1),
                   cat::product_projection(cat::pair(cat::real_line()), Space::euclidean(1, "P")),
                   cat::pair_projection(cat::circle(), cat::real_line()), cat::cover_example(2, 0.0, 1e-3),
                   cat::family_projection(cat::real_line(), cat::action(0, false))};
  for (const auto& m : ms) {
    CAPTURE(m->name);
    CHECK(morphism_check(*m, 100, 2, tol).pass);
  }
  const auto bad = with_corrupted_object_map(cat::action_projection(0, true), 0.0);
  CHECK(morphism_check(*bad, 20, 2, tol).pass);
  const auto bad2 = with_corrupted_object_map(cat::pullback_projection(cat::pair(cat::real_line()), 1), 1e-3);
  CHECK_FALSE(morphism_check(*bad2, 20, 2, tol).pass);
}

TEST_CASE("fibration probe flags") {
  const Tolerances tol;
  SUBCASE("Morita pullback projection") {
    const auto v = fibration_probe(*cat::pullback_projection(cat::pair(cat::real_line()), 1), 20, 1, tol, 8);
    CHECK(v.submersion_ok);
    CHECK(v.shriek_submersion_ok);
    CHECK(v.star_surjective_heuristic);
    CHECK(v.uniform_ok);
  }
  SUBCASE("product with a manifold is a fibration but not uniform") {
    const auto v =
        fibration_probe(*cat::product_projection(cat::pair(cat::real_line()), Space::euclidean(1, "P")), 20, 1, tol, 8);
    CHECK(v.fibration());
    CHECK_FALSE(v.uniform_ok);
    CHECK(v.min_sv_uniform < 1e-12);
  }
  SUBCASE("disjoint-union cover fails star surjectivity") {
    const auto v = fibration_probe(*cat::cover_example(2, 0.0, 1e-3), 20, 1, tol, 8);
    CHECK(v.submersion_ok);
    CHECK_FALSE(v.star_surjective_heuristic);
    REQUIRE(v.uncovered_witness.has_value());
  }
}

TEST_CASE("catalog lookup") {
  for (const auto& n : cat::names()) {
    CAPTURE(n);
    CHECK_NOTHROW(cat::by_name(n, {}));
  }
  CHECK_THROWS_AS(cat::by_name("nope", {}), Error);
  CHECK_THROWS_AS(cat::by_name("pair", {{"base_lin", 0.5}}), Error);
}
