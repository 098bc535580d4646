#include "doctest.h"

#include <cmath>

#include "mec/config.hpp"
#include "mec/error.hpp"
#include "mec/integrate.hpp"
#include "mec/interval.hpp"
#include "mec/linalg.hpp"
#include "mec/manifold.hpp"
#include "mec/path.hpp"
#include "mec/report.hpp"

using namespace mec;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

const DomainGuard kAnywhere = [](const Point&) { return true; };

}  // namespace

TEST_CASE("angles wrap and distances use the short way round") {
  const Patch p({CoordKind::Angle, CoordKind::Line}, "S1xR");
  const Eigen::VectorXd x = p.normalize(vec({-0.5, 3.0}));
  CHECK(x[0] == doctest::Approx(kTwoPi - 0.5));
  CHECK(x[1] == 3.0);
  const Eigen::VectorXd d = p.difference(vec({0.1, 0.0}), vec({kTwoPi - 0.1, 0.0}));
  CHECK(d[0] == doctest::Approx(0.2));
  const Space S({p});
  CHECK(S.distance(Point{0, vec({0.1, 0.0})}, Point{0, vec({kTwoPi - 0.1, 0.0})}) == doctest::Approx(0.2));
}

TEST_CASE("product patches are indexed row-major") {
  const Space a({Patch(1, 0, "a0"), Patch(1, 0, "a1")});
  const Space b({Patch(0, 1, "b0"), Patch(0, 1, "b1"), Patch(0, 1, "b2")});
  const Space ab = product(a, b);
  CHECK(ab.size() == 6);
  const Point pq = pack(a, b, Point{1, vec({2.0})}, Point{2, vec({0.5})});
  CHECK(pq.patch == 1 * 3 + 2);
  const auto [p, q] = unpack(a, b, pq);
  CHECK(p.patch == 1);
  CHECK(q.patch == 2);
  CHECK(q.coords[0] == 0.5);
}

TEST_CASE("exclusion balls") {
  Patch p(2, 0, "R2");
  p.exclude(vec({0.0, 0.0}), 0.1);
  CHECK(p.in_exclusion(vec({0.05, 0.0})));
  CHECK(!p.in_exclusion(vec({0.2, 0.0})));
  CHECK(p.exclusion_margin(vec({1.0, 0.0})) == doctest::Approx(0.9));
  const Space S({p});
  CHECK(!S.contains(Point{0, vec({0.0, 0.05})}));
}

TEST_CASE("RK4 on x' = x converges at fourth order") {
  const Space R = Space::euclidean(1);
  const VectorField f = [](double, const Point& p) { return p.coords; };
  auto error_at = [&](int steps) {
    Point p{0, vec({1.0})};
    const double h = 1.0 / steps;
    for (int s = 0; s < steps; ++s) p.coords = rk4_step(R, f, s * h, p, h);
    return std::abs(p.coords[0] - std::exp(1.0));
  };
  const double order = std::log2(error_at(20) / error_at(40));
  CHECK(order > 3.7);
  CHECK(order < 4.3);
}

TEST_CASE("integrator reports blowup of x' = x^2 near t = 1/2") {
  const Tolerances tol;
  const Space R = Space::euclidean(1);
  const VectorField f = [](double, const Point& p) { return Eigen::VectorXd(p.coords.cwiseProduct(p.coords)); };
  const auto out = integrate(R, f, Point{0, vec({2.0})}, 1.0, kAnywhere, tol);
  REQUIRE(!out.completed());
  CHECK(*out.escape_reason == EscapeReason::NormBlowup);
  CHECK(std::abs(*out.escape_time - 0.5) < 0.05);
}

TEST_CASE("integrator stops at an exclusion ball and hits output times") {
  const Tolerances tol;
  Patch p(1, 0, "R");
  p.exclude(vec({0.5}), 1e-3);
  const Space R({p});
  const VectorField f = [](double, const Point&) { return vec({1.0}); };
  const auto hit = integrate(R, f, Point{0, vec({0.0})}, 1.0, kAnywhere, tol);
  REQUIRE(!hit.completed());
  CHECK(*hit.escape_reason == EscapeReason::ExcludedPoint);
  CHECK(*hit.escape_time < 0.5);
  CHECK(*hit.escape_time > 0.49);

  const std::vector<double> times{0.25, 0.75};
  const auto ok = integrate(Space::euclidean(1), f, Point{0, vec({0.0})}, 1.0, kAnywhere, tol, times);
  REQUIRE(ok.completed());
  REQUIRE(ok.at(0.25, tol.tol_time).has_value());
  CHECK(ok.at(0.25, tol.tol_time)->coords[0] == doctest::Approx(0.25));
  CHECK(ok.end().coords[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(integrate(R, f, Point{0, vec({0.0})}, -1.0, kAnywhere, tol), Error);
}

TEST_CASE("interval arithmetic encloses the real result") {
  const Interval a(1.0, 2.0);
  const Interval b(-1.0, 3.0);
  const Interval p = a * b;
  CHECK(p.lo <= -2.0);
  CHECK(p.hi >= 6.0);
  CHECK(p.lo > -2.0 - 1e-12);
  const Interval r = sqrt(Interval(2.0));
  CHECK(r.contains(std::sqrt(2.0)));
  CHECK(r.width() > 0.0);
  const Interval s = sin(Interval(0.0, 4.0));
  CHECK(s.hi >= 1.0);
  CHECK(s.lo <= std::sin(4.0));
  CHECK(sqr(Interval(-1.0, 2.0)).lo <= 0.0);
  CHECK(sqr(Interval(-1.0, 2.0)).hi >= 4.0);
  CHECK(hull(a, Interval(5.0)).hi >= 5.0);
  CHECK(round_down(1.0) < 1.0);
  CHECK(round_up(1.0) > 1.0);
}

TEST_CASE("linear algebra helpers") {
  Eigen::MatrixXd a(3, 2);
  a << 1, 0, 0, 1, 1, 1;
  CHECK(numerical_rank(a, 1e-9) == 2);
  const Eigen::MatrixXd k = null_space(a.transpose(), 1e-9);
  REQUIRE(k.cols() == 1);
  CHECK((a.transpose() * k).norm() < 1e-12);
  CHECK(subspace_residual(vec({1.0, 1.0, 2.0}), a, 1e-9) < 1e-12);
  CHECK(subspace_distance(vec({0.0, 0.0, 3.0}), a, 1e-9) > 0.1);
  Eigen::MatrixXd e1(3, 1);
  e1 << 1, 0, 0;
  Eigen::MatrixXd e2(3, 1);
  e2 << 0, 1, 0;
  CHECK(min_principal_angle(e1, e2, 1e-9) == doctest::Approx(kTwoPi / 4));
  CHECK(intersect_spans(a, e1, 1e-9).cols() == 0);

  // Hand projection: (0, 0, 2, 2) onto (0, 0, 1, 4) leaves 6 / sqrt(17).
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(4, 3);
  b(0, 0) = 1;
  b(1, 1) = 1;
  b(2, 2) = 1;
  b(3, 2) = 4;
  const Eigen::VectorXd v = vec({2.0, 0.0, 2.0, 2.0});
  CHECK(subspace_distance(v, b, 1e-9) == doctest::Approx(6.0 / std::sqrt(17.0)).epsilon(1e-12));
  CHECK(subspace_residual(v, b, 1e-9) == doctest::Approx(6.0 / std::sqrt(17.0 * 12.0)).epsilon(1e-12));
  CHECK_THROWS_AS(subspace_residual(v, Eigen::MatrixXd::Ones(4, 2), 1e-9), Error);
}

TEST_CASE("closed-form path velocities") {
  const Space S({Patch({CoordKind::Angle, CoordKind::Line}, "S1xR")});
  const BasePath lin = linear_path(S, Point{0, vec({6.0, 0.0})}, vec({1.0, 2.0}));
  CHECK(lin.at(1.0).coords[0] == doctest::Approx(7.0 - kTwoPi));
  CHECK(velocity_mismatch(lin, 20, 1e-6) < 1e-6);
  const BasePath osc = oscillating_path(S, Point{0, vec({1.0, 1.0})}, vec({0.5, 1.0}), 2);
  CHECK(velocity_mismatch(osc, 20, 1e-6) < 1e-5);
  CHECK(S.distance(osc.at(0.0), osc.at(1.0)) < 1e-12);
  const BasePath back = reverse(lin);
  CHECK(S.distance(back.at(0.0), lin.at(1.0)) < 1e-12);
  CHECK(S.distance(subpath(lin, 0.25, 0.5).at(1.0), lin.at(0.5)) < 1e-12);
}

TEST_CASE("configuration files") {
  const Config c = parse_config("# comment\ntransport.drift_tol = 2e-6\n\nbudget.probe_paths=40\n");
  CHECK(c.tol.drift_tol == 2e-6);
  CHECK(c.budget.probe_paths == 40);
  CHECK_THROWS_AS(parse_config("nope.key = 1\n"), Error);
  CHECK_THROWS_AS(parse_config("transport.drift_tol = abc\n"), Error);
  CHECK_THROWS_AS(parse_config("transport.drift_tol\n"), Error);
  CHECK_THROWS_AS(parse_config("budget.probe_paths = -3\n"), Error);

  const Config half = Config{}.scaled(0.5);
  CHECK(half.budget.probe_paths == 250);
  CHECK(half.budget.path_pairs >= 1);

  // The snapshot round-trips through set().
  Config d;
  for (const auto& [k, v] : c.snapshot()) d.set(k, v);
  CHECK(d.snapshot() == c.snapshot());
}

TEST_CASE("real formatting keeps 17 significant digits") {
  CHECK(format_real(1.0) == "1.0000000000000000e+00");
  CHECK(format_real(0.1) == "1.0000000000000001e-01");
  CHECK(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_real(kInf) == "inf");
  CHECK(format_real(std::nan("")) == "nan");
}

TEST_CASE("verdict bands") {
  CHECK(classify(1e-8, 1e-6) == MultVerdict::Multiplicative);
  CHECK(classify(5e-6, 1e-6) == MultVerdict::Inconclusive);
  CHECK(classify(1e-4, 1e-6) == MultVerdict::NotMultiplicative);
  Report r;
  r.absorb(1.0, Witness{"a", {1.0}});
  r.absorb(1.0, Witness{"b", {2.0}});
  r.absorb(0.5, Witness{"c", {3.0}});
  CHECK(r.witness->description == "a");
  r.finalize(0.1);
  CHECK(!r.pass);
}
