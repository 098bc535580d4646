#include "doctest.h"

#include <cmath>

#include "mec/catalog.hpp"
#include "mec/constructions.hpp"
#include "mec/error.hpp"

using namespace mec;
namespace cat = mec::catalog;
namespace fx = mec::fixtures;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

bool throws_code(const std::function<void()>& f, ErrorCode code) {
  try {
    f();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

}  // namespace

TEST_CASE("morita transport matches the exponential closed form") {
  const Tolerances tol;
  const double k = 0.7;
  const auto m = cat::pullback_projection(cat::pair(cat::real_line()), 1);
  const Connection c = morita_connection(m, fx::exponential_lift(k), tol);
  const Groupoid& G = *m->total;
  const Groupoid& H = *m->base;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const Point g = G.sample_arrow(3, i);
    const BasePath gamma = H.arrow_path(m->arrow_map(g), 3, i);
    const TransportOutcome o = parallel_transport(c, gamma, g, 1.0, tol);
    REQUIRE(o.completed());
    const auto h0 = gamma.at(0.0).coords;
    const auto h1 = gamma.at(1.0).coords;
    // Arrows of pair(R) are (target, source).
    const double fx1 = g.coords[0] * std::exp(k * (h1[0] - h0[0]));
    const double fy1 = g.coords[3] * std::exp(k * (h1[1] - h0[1]));
    CHECK(std::abs(o.end->coords[0] - fx1) < 1e-6);
    CHECK(std::abs(o.end->coords[3] - fy1) < 1e-6);
  }
}

TEST_CASE("morita connection is multiplicative and unique") {
  const Tolerances tol;
  const auto m = cat::pullback_projection(cat::pair(cat::real_line()), 1);
  const Connection c = morita_connection(m, fx::exponential_lift(0.7), tol);
  CHECK(multiplicativity_check_pointwise(c, 50, 1, tol).verdict == MultVerdict::Multiplicative);
  CHECK(complement_check(c, 20, 1, tol).pass);
  CHECK(compare_connections(c, morita_connection(m, fx::exponential_lift(0.7), tol), 50, 2, tol).pass);

  Connection skew = c;
  const HorLift base = c.hor;
  skew.hor = [base](const Point& g, const Eigen::VectorXd& a) -> Eigen::VectorXd {
    Eigen::VectorXd v = base(g, a);
    v[0] += 1e-3 * a[0];
    return v;
  };
  CHECK(multiplicativity_check_pointwise(skew, 50, 1, tol).verdict == MultVerdict::NotMultiplicative);
  CHECK(!compare_connections(skew, c, 50, 2, tol).pass);
}

TEST_CASE("morita over a point group returns along a closed circle path") {
  const Tolerances tol;
  const auto m = cat::pullback_projection(cat::group_bundle(Space::point(), {cat::GroupKind::Circle, 1}), 1);
  const Connection c = morita_connection(m, fx::flat_lift(0, 1), tol);
  const BasePath gamma = linear_path(m->base->arrows, Point{0, vec({0.0})}, vec({kTwoPi}));
  const Point g{0, vec({0.3, 0.0, -1.2})};
  const auto o = parallel_transport(c, gamma, g, 1.0, tol);
  REQUIRE(o.completed());
  CHECK(m->total->arrows.distance(*o.end, g) < 1e-9);
  CHECK(c.hor(g, vec({1.0})).isApprox(vec({0.0, 1.0, 0.0})));
}

TEST_CASE("atlas and glued connection on the two-window bundle family") {
  const Tolerances tol;
  const auto F = fx::bundle_fiber(2);
  const auto fam = fx::bundle_family(F);
  const auto atlas = fx::two_window_atlas(fam, F, tol);
  CHECK(atlas_check(atlas, 50, 1, tol).pass);
  const Connection c = glue_local_trivial(atlas, standard_partition(atlas), tol);
  CHECK(complement_check(c, 30, 1, tol).pass);
  CHECK(multiplicativity_check_pointwise(c, 50, 1, tol).verdict == MultVerdict::Multiplicative);
  CHECK(completeness_probe(c, random_arrow_paths(c), 50, 1, tol).kind == ProbeKind::NoCounterexampleFound);

  auto gap = standard_partition(atlas);
  const BaseFunction first = gap[0];
  gap[0] = [first](double n) { return 0.9 * first(n); };
  CHECK(throws_code([&] { glue_local_trivial(atlas, gap, tol); }, ErrorCode::PartitionGap));
  CHECK(throws_code(
      [&] {
        make_atlas(fam, F, {{Interval(-1.0, 1.0), Interval(-1.05, 2.0), constant_shift(0.0)}}, Interval(-1, 1), tol);
      },
      ErrorCode::AtlasMismatch));
}

TEST_CASE("single window gives the flat connection") {
  const Tolerances tol;
  const auto F = fx::bundle_fiber(2);
  const auto fam = fx::bundle_family(F);
  const auto atlas = fx::single_window_atlas(fam, F, tol);
  const Connection c = glue_local_trivial(atlas, standard_partition(atlas), tol);
  const Point g{1, vec({0.4, -1.3})};
  CHECK(c.hor(g, vec({2.0})).isApprox(vec({2.0, 0.0})));
}

TEST_CASE("invariant exhaustions") {
  const Tolerances tol;
  const auto unit = invariant_exhaustion(cat::unit_groupoid(cat::real_line()), 50, 1, tol);
  CHECK(unit.report.pass);
  CHECK(unit.f(Point{0, vec({std::sqrt(3.0)})}).coords[0] == doctest::Approx(2.0));
  const auto z2 = invariant_exhaustion(fx::bundle_fiber(2), 50, 1, tol);
  CHECK(z2.report.worst_residual == 0.0);
  const auto compact = invariant_exhaustion(cat::unit_groupoid(cat::circle()), 10, 1, tol);
  CHECK(compact.constant);
  CHECK(throws_code([&] { invariant_exhaustion(cat::pair(cat::real_line()), 10, 1, tol); }, ErrorCode::NotSourceProper));
}

TEST_CASE("level schedules") {
  const Tolerances tol;
  const auto F = fx::bundle_fiber(2);
  const auto fam = fx::bundle_family(F);
  const auto f = invariant_exhaustion(F, 10, 1, tol);

  const auto one = level_schedule(fx::single_window_atlas(fam, F, tol), f, 5, tol);
  REQUIRE(one.levels.size() == 1);
  CHECK(one.levels[0] == std::vector<int>{2, 3, 4, 5, 6});
  CHECK(one.disjoint());

  const auto atlas = fx::two_window_atlas(fam, F, tol);
  auto two = level_schedule(atlas, f, 4, tol);
  CHECK(two.disjoint());
  // Levels of different windows never coincide and every level exceeds the
  // recorded supremum plus the slab thickness.
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(two.levels[0][i] != two.levels[1][i]);
    CHECK(two.levels[1][i] > two.suprema[2 * i + 1].hi + 2 * two.epsilon);
  }
  // Oracle: at n = 0 the slab of window 1 at level m sits at
  // f = 0.2 + sqrt(m^2 - 1) in window 1, i.e. at chart value 0.2 + ... in window 0.
  const double m0 = two.levels[0][0];
  const double chart = 0.2 + std::sqrt((m0 + 0.2) * (m0 + 0.2) - 1.0);
  CHECK(two.levels[1][0] >= static_cast<int>(std::floor(std::sqrt(chart * chart + 1.0))) + 1);

  two.levels[1][1] = two.levels[0][1];
  verify_disjointness(two, atlas, f);
  CHECK(!two.disjoint());
  CHECK(throws_code([&] { complete_connection_builder(atlas, f, two, 50, 1, tol); }, ErrorCode::CertificateFailure));

  const auto compact = invariant_exhaustion(cat::unit_groupoid(cat::circle()), 10, 1, tol);
  const auto empty = level_schedule(atlas, compact, 4, tol);
  CHECK(empty.levels[0].empty());
}

TEST_CASE("complete builder output is certified and survives the probe") {
  const Tolerances tol;
  const auto F = fx::bundle_fiber(2);
  const auto fam = fx::bundle_family(F);
  const auto atlas = fx::two_window_atlas(fam, F, tol);
  const auto f = invariant_exhaustion(F, 10, 1, tol);
  const auto schedule = level_schedule(atlas, f, 4, tol);
  const BuiltConnection built = complete_connection_builder(atlas, f, schedule, 100, 1, tol);
  CHECK(built.certificate.verdict == CertificateVerdict::CertifiedComplete);
  for (const auto& w : built.certificate.windows) {
    CHECK(w.flatness.worst_residual < 1e-9);
    CHECK(w.bounded);
  }
  // Independent recheck with another seed.
  const auto again =
      flatness_certificate_check(built.connection, atlas, f, schedule_levels(schedule), 100, 77, tol);
  CHECK(again.verdict == CertificateVerdict::CertifiedComplete);
  CHECK(multiplicativity_check_pointwise(built.connection, 30, 1, tol).verdict == MultVerdict::Multiplicative);
  const auto probe = completeness_probe(built.connection, fx::box_paths(built.connection, atlas.box), 40, 1, tol);
  CHECK(probe.kind == ProbeKind::NoCounterexampleFound);
}

TEST_CASE("certificate clauses on flat and skewed connections") {
  const Tolerances tol;
  const auto F = fx::bundle_fiber(2);
  const auto fam = fx::bundle_family(F);
  const auto atlas = fx::single_window_atlas(fam, F, tol);
  const auto f = invariant_exhaustion(F, 10, 1, tol);
  const Connection flat = glue_local_trivial(atlas, standard_partition(atlas), tol);
  CHECK(flatness_certificate_check(flat, atlas, f, {{3.0}}, 50, 1, tol).verdict ==
        CertificateVerdict::CertifiedComplete);

  Connection skew = flat;
  skew.hor = [](const Point& g, const Eigen::VectorXd& w) -> Eigen::VectorXd {
    return vec({w[0], g.coords[1] * g.coords[1] * w[0]});
  };
  skew.hor0 = [](const Point& x, const Eigen::VectorXd& w) -> Eigen::VectorXd {
    return vec({w[0], x.coords[1] * x.coords[1] * w[0]});
  };
  // S = {x = 1} is the level sqrt(2).
  const auto cert = flatness_certificate_check(skew, atlas, f, {{std::sqrt(2.0)}}, 50, 1, tol);
  CHECK(cert.verdict == CertificateVerdict::NotCertified);
  CHECK(cert.failed_clause.find("clause (1)") != std::string::npos);
  CHECK(cert.windows[0].flatness.worst_residual == doctest::Approx(1.0));

  const Connection other = glue_local_trivial(fx::single_window_atlas(fam, F, tol), standard_partition(atlas), tol);
  CHECK(throws_code([&] { flatness_certificate_check(other, atlas, f, {{2.0}, {3.0}}, 5, 1, tol); },
                    ErrorCode::AtlasMismatch));
}

TEST_CASE("haar averaging") {
  const Tolerances tol;
  const auto fam = fx::rotation_family();
  const GroupoidPtr G = fam->total;

  // (n, θ, p) -> (1, 0, p) commutes with the rotations: a fixed point.
  const ArrowField scaling = [](const Point& g) { return vec({1.0, 0.0, g.coords[2], g.coords[3]}); };
  const auto fixed = haar_average(G, scaling, 64, 20, 1, tol);
  CHECK(field_distance(*G, fixed.arrows, scaling, 100, 2) < 1e-9);

  const BaseLift hor0 = fx::flat_lift(1, 3);
  const BaseLift hs = fx::skewed_source_lift();
  const ArrowField X = [G, hor0, hs](const Point& g) { return hs(g, hor0(G->src(g), vec({1.0}))); };
  CHECK(!multiplicative_field_check(*G, X, [](const Point&) { return vec({1.0, 0.0, 0.0}); }, 20, 1, tol).pass);
  const auto coarse = haar_average(G, X, 256, 50, 1, tol);
  CHECK(coarse.report.pass);
  CHECK(coarse.report.worst_residual < 1e-6);
  const auto fine = haar_average(G, X, 1024, 0, 1, tol);
  CHECK(field_distance(*G, coarse.arrows, fine.arrows, 50, 3) < 1e-8);
  // Idempotence.
  const auto twice = haar_average(G, coarse.arrows, 16, 0, 1, tol);
  CHECK(field_distance(*G, twice.arrows, coarse.arrows, 10, 4) < 1e-9);

  const ArrowField bent = [](const Point& g) { return vec({1.0, 0.0, g.coords[1], 0.0}); };
  CHECK(throws_code([&] { haar_average(G, bent, 16, 0, 1, tol); }, ErrorCode::NonProjectableInput));
  CHECK(throws_code([&] { haar_average(cat::pair(cat::real_line()), bent, 16, 0, 1, tol); },
                    ErrorCode::QuadratureMissing));
}

TEST_CASE("finite group averaging is an exact sum") {
  const Tolerances tol;
  const auto m = cat::group_bundle_projection(cat::real_line(), {cat::GroupKind::Finite, 3});
  const GroupoidPtr G = m->total;
  const ArrowField X = [](const Point& g) { return vec({std::sin(g.coords[0])}); };
  const auto avg = haar_average(G, X, 0, 50, 1, tol);
  CHECK(avg.report.worst_residual < 1e-12);
  CHECK(field_distance(*G, avg.arrows, X, 50, 1) < 1e-12);
}

TEST_CASE("proper family connection from a skewed source lift") {
  const Tolerances tol;
  const auto fam = fx::rotation_family();
  const Connection c = proper_family_connection(fam, fx::flat_lift(1, 3), fx::skewed_source_lift(), 256, tol);
  const auto rep = multiplicativity_check_pointwise(c, 30, 1, tol);
  CHECK(rep.verdict == MultVerdict::Multiplicative);
  CHECK(complement_check(c, 20, 1, tol).pass);
}
