#include "doctest.h"

#include <cmath>

#include "mec/catalog.hpp"
#include "mec/connection.hpp"
#include "mec/error.hpp"
#include "mec/tangent.hpp"

using namespace mec;
namespace cat = mec::catalog;

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

BaseLift zero_lift() {
  return [](const Point& x, const Eigen::VectorXd&) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(x.coords.size()); };
}

}  // namespace

TEST_CASE("luca lift is a complement with the expected product clause") {
  const Tolerances tol;
  const Connection c = connections::luca();
  CHECK(complement_check(c, 50, 1, tol).pass);
  // Addition in R^2: (1, 1) + (1, 1) = (2, 2). The lift at x = 2 of the
  // base sum 2 is (2, 2^2 * 2) = (2, 8).
  const Point g{0, vec({1.0, 0.0})};
  const ProductClause pc = product_clause(c, {g, g, vec({1.0}), vec({1.0})}, tol);
  CHECK((pc.produced - vec({2.0, 2.0})).norm() < 1e-9);
  CHECK((pc.required - vec({2.0, 8.0})).norm() < 1e-9);
  CHECK(pc.residual() == doctest::Approx(6.0));
  const auto rep = multiplicativity_check_pointwise(c, 30, 2, tol);
  CHECK(rep.verdict == MultVerdict::NotMultiplicative);
  CHECK(rep.worst_clause() == "product");
  CHECK(rep.source.worst_residual < 1e-9);
}

TEST_CASE("rank-deficient lifts are rejected") {
  const Tolerances tol;
  Connection c = connections::luca();
  c.hor = [](const Point&, const Eigen::VectorXd&) { return vec({0.0, 0.0}); };
  CHECK(throws_code([&] { complement_check(c, 5, 1, tol); }, ErrorCode::RankDeficientLift));
}

TEST_CASE("action criterion: rotation rejected, trivial action accepted") {
  const Tolerances tol;
  const auto rot = action_connection(cat::action_projection(0, false), zero_lift(), 50, 3, tol);
  CHECK(rot.rejected());
  // Generator (-y, x) at (1, 0) against Hor0 = 0.
  CHECK(std::abs(rot.landmark_residual - 1.0) < 1e-6);
  const auto triv = action_connection(cat::action_projection(0, true), zero_lift(), 50, 3, tol);
  REQUIRE(!triv.rejected());
  CHECK(multiplicativity_check_pointwise(*triv.connection, 50, 3, tol).worst() < 1e-9);
  CHECK(throws_code([&] { action_candidate(cat::luca(), zero_lift(), tol); }, ErrorCode::NotAnActionMorphism));

  // The finite rotation group Z_3 acts without infinitesimal generators.
  const auto z3 = action_connection(cat::action_projection(3, false), zero_lift(), 30, 3, tol);
  CHECK(z3.lie_algebra.worst_residual < 1e-9);
}

TEST_CASE("kernel connection of the pair projection") {
  const Tolerances tol;
  const auto m = cat::pair_projection(cat::circle(), cat::real_line());
  const Connection c = connections::pair_product(m);
  CHECK(kernel_tangency(c, 30, 1, tol).worst_residual < 1e-9);
  const Connection k = kernel_connection(c, tol);
  CHECK(multiplicativity_check_pointwise(k, 30, 1, tol).verdict == MultVerdict::Multiplicative);
  CHECK(throws_code([&] { kernel_connection(connections::luca(), tol); }, ErrorCode::KernelNotExposed));
}

TEST_CASE("composition of connections") {
  const Tolerances tol;
  const auto m = cat::pair_projection(cat::circle(), cat::real_line());
  const Connection outer = connections::pair_product(m);
  const Connection inner = connections::identity(cat::identity(m->total));
  const Connection c = compose_connections(inner, outer);
  const Point g = m->total->sample_arrow(1, 0);
  CHECK((c.hor(g, vec({1.0, 2.0})) - outer.hor(g, vec({1.0, 2.0}))).norm() < 1e-15);
  CHECK(multiplicativity_check_pointwise(c, 20, 1, tol).verdict == MultVerdict::Multiplicative);
  CHECK(throws_code([&] { compose_connections(outer, connections::luca()); }, ErrorCode::IncompatibleMorphisms));
}

TEST_CASE("lifted vector fields on a family") {
  const Tolerances tol;
  const auto m = cat::family_projection(cat::real_line(), cat::pair(cat::real_line("F")));
  const Connection c = connections::product(m);
  const auto lifted = multiplicative_vf_lift(c, [](const Point& n) { return vec({std::sin(n.coords[0])}); }, 30, 1, tol);
  CHECK(lifted.report.pass);
  CHECK(throws_code([&] { multiplicative_vf_lift(connections::luca(), [](const Point&) { return vec({1.0}); }, 5, 1, tol); },
                    ErrorCode::NotAFamily));
  // A field twisting the fibres against the pair structure is not multiplicative.
  const ArrowField bad = [](const Point& g) { return vec({1.0, g.coords[1], 0.0}); };
  CHECK(!multiplicative_field_check(*m->total, bad, [](const Point&) { return vec({1.0, 0.0}); }, 20, 1, tol).pass);
}

TEST_CASE("tangent structure maps of the pair groupoid") {
  const Tolerances tol;
  const auto G = cat::pair(cat::real_line());
  const Point g{0, vec({2.0, 1.0})};  // (target, source)
  const auto t = tangent_structure_maps(*G, g, tol);
  CHECK(t.Ts.isApprox((Eigen::MatrixXd(1, 2) << 0, 1).finished()));
  CHECK(t.Tt.isApprox((Eigen::MatrixXd(1, 2) << 1, 0).finished()));
  CHECK(t.Ti.isApprox((Eigen::MatrixXd(2, 2) << 0, 1, 1, 0).finished()));
  const Point h{0, vec({1.0, -3.0})};
  const auto p = tangent_structure_maps(*G, g, h, tol);
  CHECK(p.composable_basis.cols() == 3);
  CHECK(p.Tm_restricted.rows() == 2);
}

TEST_CASE("VB-subgroupoid check") {
  const Tolerances tol;
  const auto G = cat::pair(cat::real_line());
  const FrameField full = [](const Point&) { return Eigen::MatrixXd::Identity(2, 2); };
  CHECK(vb_subgroupoid_check(*G, full, 30, 1, tol).pass);
  // The diagonal direction (1, 1) is the tangent of the pair groupoid of a
  // translation orbit: closed under all structure maps.
  const FrameField diag = [](const Point&) { return Eigen::MatrixXd::Ones(2, 1); };
  CHECK(vb_subgroupoid_check(*G, diag, 30, 1, tol).pass);
  // The target direction alone is not closed under inversion.
  const FrameField target = [](const Point&) { return (Eigen::MatrixXd(2, 1) << 1, 0).finished(); };
  CHECK(!vb_subgroupoid_check(*G, target, 30, 1, tol).pass);
  // The luca complement Hor = span(1, x^2) on R^2 fails under addition.
  const auto V = cat::luca()->total;
  const FrameField luca = [](const Point& g) { return (Eigen::MatrixXd(2, 1) << 1, g.coords[0] * g.coords[0]).finished(); };
  CHECK(!vb_subgroupoid_check(*V, luca, 30, 1, tol).pass);
}

TEST_CASE("splitting correspondence") {
  for (std::uint64_t i = 0; i < 20; ++i) {
    const VbFiberData d = random_splitting_fixture(5, i);
    const auto r = splitting_correspondence(d, SplittingDatum::RightSplitting);
    CHECK(r.worst() < 1e-12);
    const auto n = d.iota.rows();
    CHECK((*r.data.h * d.proj + d.iota * *r.data.p - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-12);
    CHECK((r.Phi * r.Phi_inv - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-12);
  }
  VbFiberData bad = random_splitting_fixture(5, 0);
  bad.proj(0, 0) += 1.0;
  CHECK(throws_code([&] { splitting_correspondence(bad, SplittingDatum::RightSplitting); }, ErrorCode::NotASplitting));
  VbFiberData none = random_splitting_fixture(5, 1);
  none.h.reset();
  CHECK(throws_code([&] { splitting_correspondence(none, SplittingDatum::RightSplitting); }, ErrorCode::NotASplitting));
}

TEST_CASE("core and side of the full tangent of the pair groupoid") {
  const Tolerances tol;
  const auto G = cat::pair(cat::real_line());
  const auto cs = core_side_decomposition(*G, Point{0, vec({0.5})}, Eigen::MatrixXd::Identity(2, 2), tol);
  REQUIRE(cs.core.cols() == 1);
  REQUIRE(cs.side.cols() == 1);
  // Arrows are (target, source): ker Ts is the target direction, the units
  // span the diagonal.
  CHECK(std::abs(cs.core(1, 0)) < 1e-9);
  CHECK(std::abs(cs.side(0, 0) - cs.side(1, 0)) < 1e-9);
  CHECK(cs.complement_residual < 1e-9);
  CHECK(throws_code([&] { core_side_decomposition(*G, Point{0, vec({0.5})}, Eigen::MatrixXd::Ones(2, 2), tol); },
                    ErrorCode::DegenerateBasis));
}
