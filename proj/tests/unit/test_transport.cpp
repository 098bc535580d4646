#include "doctest.h"

#include <cmath>

#include "mec/catalog.hpp"
#include "mec/error.hpp"
#include "mec/transport.hpp"

using namespace mec;
namespace cat = mec::catalog;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Lift of the constant object family on N x F -> N with hor = (w, 0).
Connection flat_family(const MorphismPtr& m) {
  Connection c;
  c.morphism = m;
  c.provenance = "flat";
  const int dn = m->base->objects.dim(0);
  c.hor = [dn](const Point& g, const Eigen::VectorXd& a) -> Eigen::VectorXd {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(g.coords.size());
    v.head(dn) = a;
    return v;
  };
  c.hor0 = [dn](const Point& x, const Eigen::VectorXd& w) -> Eigen::VectorXd {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(x.coords.size());
    v.head(dn) = w;
    return v;
  };
  return c;
}

}  // namespace

TEST_CASE("luca transport follows y = y0 + (x^3 - x0^3)/3") {
  const Tolerances tol;
  const Connection c = connections::luca();
  const Groupoid& G = *c.morphism->total;
  const Groupoid& H = *c.morphism->base;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const Point g = G.sample_arrow(5, i);
    const BasePath gamma = H.arrow_path(c.morphism->arrow_map(g), 5, i);
    const TransportOutcome o = parallel_transport(c, gamma, g, 1.0, tol);
    REQUIRE(o.completed());
    // Unwrapped angle travelled along gamma.
    const double x0 = g.coords[0];
    double x = x0;
    const int steps = 4000;
    for (int k = 0; k < steps; ++k) {
      const double t = (k + 0.5) / steps;
      x += gamma.velocity(t)[0] / steps;
    }
    const double y = g.coords[1] + (x * x * x - x0 * x0 * x0) / 3.0;
    CHECK(std::abs(o.end->coords[0] - x) < 1e-6);
    CHECK(std::abs(o.end->coords[1] - y) < 1e-6);
    CHECK(o.drift < 1e-9);
  }
}

TEST_CASE("transport rejects a start off the path") {
  const Tolerances tol;
  const Connection c = connections::luca();
  const BasePath gamma = linear_path(c.morphism->base->arrows, Point{0, vec({1.0})}, vec({1.0}));
  CHECK_THROWS_AS(parallel_transport(c, gamma, Point{0, vec({2.0, 0.0})}, 1.0, tol), Error);
}

TEST_CASE("holonomy of the luca connection around the circle") {
  const Tolerances tol;
  const Connection c = connections::luca();
  const Space& S1 = c.morphism->base->arrows;
  const BasePath loop = linear_path(S1, Point{0, vec({1.0})}, vec({kTwoPi}));
  const HolonomyResult h = holonomy(c, loop, {Point{0, vec({1.0, 0.0})}}, tol);
  REQUIRE(h.escaped == 0);
  // The chart point moves by 2 pi in x; y by ((1 + 2 pi)^3 - 1)/3.
  const double dy = (std::pow(1.0 + kTwoPi, 3) - 1.0) / 3.0;
  CHECK(h.deviation.worst_residual == doctest::Approx(std::hypot(kTwoPi, dy)).epsilon(1e-6));
  CHECK(h.reverse_identity.worst_residual < 1e-6);
  const BasePath open = linear_path(S1, Point{0, vec({1.0})}, vec({1.0}));
  CHECK_THROWS_AS(holonomy(c, open, {Point{0, vec({1.0, 0.0})}}, tol), Error);
}

TEST_CASE("path criterion flags the luca product clause") {
  const Tolerances tol;
  const Connection c = connections::luca();
  const Space& S1 = c.morphism->base->arrows;
  const BasePath gamma = linear_path(S1, Point{0, vec({1.0})}, vec({kTwoPi}));
  const PinnedPathPair pin{Point{0, vec({1.0, 0.0})}, Point{0, vec({1.0, 0.0})}, gamma, gamma};
  const auto rep = transport_multiplicativity_check(c, 5, 3, tol, {pin});
  CHECK(rep.verdict == MultVerdict::NotMultiplicative);
  CHECK(rep.worst_clause() == "product");
  CHECK(rep.source.worst_residual < 1e-9);
  // x^2 is even, so the inverse clause holds.
  CHECK(rep.inverse.worst_residual < 1e-6);
}

TEST_CASE("flat family connection passes the path criterion and the current groupoid check") {
  const Tolerances tol;
  const auto m = cat::family_projection(cat::real_line(), cat::pair(cat::real_line("F")));
  const Connection c = flat_family(m);
  const auto rep = transport_multiplicativity_check(c, 10, 4, tol);
  CHECK(rep.verdict == MultVerdict::Multiplicative);
  CHECK(rep.completed == 10);
  const auto cur = current_groupoid_check(c, 10, 4, tol);
  CHECK(cur.injectivity.pass);
  CHECK(cur.reconstruction.pass);
  CHECK(cur.surjectivity_applicable);
}

TEST_CASE("probes on the punctured group bundle") {
  const Tolerances tol;
  const auto m = cat::group_bundle_projection(cat::real_line(), {cat::GroupKind::Finite, 2},
                                              cat::Puncture{vec({0.0}), 1e-3});
  const Connection c = flat_family(m);
  const auto total = completeness_probe(c, random_arrow_paths(c), 200, 9, tol);
  CHECK(total.kind == ProbeKind::IncompleteWitness);
  REQUIRE(total.escape_time.has_value());
  CHECK(*total.escape_time < 1.0);
  REQUIRE(total.start.has_value());
  CHECK(total.start->patch == 1);
  const auto base = base_completeness_probe(c, random_object_paths(c), 200, 9, tol);
  CHECK(base.kind == ProbeKind::NoCounterexampleFound);
  CHECK(base.attempted == 200);
}

TEST_CASE("crosscheck on the disjoint-union cover") {
  const Tolerances tol;
  const auto m = cat::cover_example(2, 0.0, 1e-3);
  const Connection c = flat_family(m);
  CrosscheckInput in;
  in.total_paths = random_arrow_paths(c);
  in.kernel_paths = random_arrow_paths(kernel_connection(c, tol));
  in.base_paths = random_object_paths(c);
  in.fibration = false;
  in.kernel_source_connected = false;
  const auto r = theorem_crosscheck_kernel(c, in, 200, 2, tol);
  CHECK(r.total.kind == ProbeKind::IncompleteWitness);
  CHECK(r.kernel.kind == ProbeKind::NoCounterexampleFound);
  CHECK(r.consistent());
  CHECK(!r.notes.empty());
}

TEST_CASE("interleave alternates families") {
  PathFamily a = [](std::uint64_t, std::uint64_t i) {
    return ProbeSample{BasePath{}, Point{0, Eigen::VectorXd::Constant(1, static_cast<double>(i))}};
  };
  PathFamily b = [](std::uint64_t, std::uint64_t i) {
    return ProbeSample{BasePath{}, Point{1, Eigen::VectorXd::Constant(1, static_cast<double>(i))}};
  };
  const PathFamily ab = interleave(a, b);
  CHECK(ab(0, 0).start.patch == 0);
  CHECK(ab(0, 1).start.patch == 1);
  CHECK(ab(0, 3).start.coords[0] == 1.0);
}
