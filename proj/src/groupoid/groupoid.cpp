#include "mec/groupoid.hpp"

#include <algorithm>
#include <cmath>

#include "mec/error.hpp"
#include "mec/linalg.hpp"

namespace mec {

bool Groupoid::admits_arrow(const Point& g) const { return arrows.contains(g) && (!arrow_guard || arrow_guard(g)); }

bool Groupoid::admits_object(const Point& x) const {
  return objects.contains(x) && (!object_guard || object_guard(x));
}

Point Groupoid::multiply(const Point& g, const Point& h) const { return mul(pack(arrows, arrows, g, h)); }

Eigen::MatrixXd Groupoid::mul_jacobian(const Point& g, const Point& h, const Tolerances& tol) const {
  return jacobian(mul, pack(arrows, arrows, g, h), tol);
}

namespace {

Witness witness_of(std::string what, std::initializer_list<const Point*> points) {
  Witness w{std::move(what), {}};
  for (const Point* p : points) {
    const auto f = flatten(*p);
    w.coords.insert(w.coords.end(), f.begin(), f.end());
  }
  return w;
}

Eigen::MatrixXd stack(std::initializer_list<Eigen::MatrixXd> blocks) {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols = std::max(cols, b.cols());
  }
  Eigen::MatrixXd out(rows, cols);
  Eigen::Index r = 0;
  for (const auto& b : blocks) {
    out.middleRows(r, b.rows()) = b;
    r += b.rows();
  }
  return out;
}

}  // namespace

Report check_axioms(const Groupoid& G, std::size_t n_samples, std::uint64_t seed, const Tolerances& tol) {
  Report rep;
  rep.check = "groupoid_axioms:" + G.name;
  rep.seed = seed;
  const Space& A = G.arrows;
  const Space& O = G.objects;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Point x = G.sample_object(seed, i);
    const Point g = G.sample_arrow(seed, i);
    const auto [a, b] = G.sample_pair(seed, i);
    if (!G.admits_object(x) || !G.admits_arrow(g) || !G.admits_arrow(a) || !G.admits_arrow(b)) {
      rep.absorb(kInf, witness_of("sampler produced an inadmissible element", {&x, &g, &a, &b}));
      continue;
    }
    const Point ux = G.unit(x);
    rep.absorb(O.distance(G.src(ux), x), witness_of("s(u(x)) = x", {&x}));
    rep.absorb(O.distance(G.tgt(ux), x), witness_of("t(u(x)) = x", {&x}));

    const Point gi = G.inv(g);
    rep.absorb(O.distance(G.src(gi), G.tgt(g)), witness_of("s(i(g)) = t(g)", {&g}));
    rep.absorb(O.distance(G.tgt(gi), G.src(g)), witness_of("t(i(g)) = s(g)", {&g}));
    rep.absorb(A.distance(G.inv(gi), g), witness_of("i(i(g)) = g", {&g}));
    rep.absorb(A.distance(G.multiply(g, gi), G.unit(G.tgt(g))), witness_of("g i(g) = u(t(g))", {&g}));
    rep.absorb(A.distance(G.multiply(gi, g), G.unit(G.src(g))), witness_of("i(g) g = u(s(g))", {&g}));
    rep.absorb(A.distance(G.multiply(G.unit(G.tgt(g)), g), g), witness_of("u(t(g)) g = g", {&g}));
    rep.absorb(A.distance(G.multiply(g, G.unit(G.src(g))), g), witness_of("g u(s(g)) = g", {&g}));

    const double gap = O.distance(G.src(a), G.tgt(b));
    rep.absorb(gap <= tol.tol_compose ? gap : kInf, witness_of("sampled pair is composable", {&a, &b}));
    const Point ab = G.multiply(a, b);
    rep.absorb(O.distance(G.src(ab), G.src(b)), witness_of("s(gh) = s(h)", {&a, &b}));
    rep.absorb(O.distance(G.tgt(ab), G.tgt(a)), witness_of("t(gh) = t(g)", {&a, &b}));

    const Point k = G.inv(G.sample_sfiber(G.src(b), seed, i));
    rep.absorb(A.distance(G.multiply(ab, k), G.multiply(a, G.multiply(b, k))),
               witness_of("(gh)k = g(hk)", {&a, &b, &k}));
  }
  rep.samples = n_samples;
  rep.finalize(tol.tol_alg);
  return rep;
}

Report check_jacobians(const Groupoid& G, std::size_t n_samples, std::uint64_t seed, const Tolerances& tol) {
  Report rep;
  rep.check = "structure_jacobians:" + G.name;
  rep.seed = seed;
  std::size_t used = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    try {
      const Point x = G.sample_object(seed, i);
      const Point g = G.sample_arrow(seed, i);
      const auto [a, b] = G.sample_pair(seed, i);
      const Point ab = pack(G.arrows, G.arrows, a, b);
      rep.absorb(jacobian_mismatch(G.src, g, tol), witness_of("Ts", {&g}));
      rep.absorb(jacobian_mismatch(G.tgt, g, tol), witness_of("Tt", {&g}));
      rep.absorb(jacobian_mismatch(G.inv, g, tol), witness_of("Ti", {&g}));
      rep.absorb(jacobian_mismatch(G.unit, x, tol), witness_of("Tu", {&x}));
      rep.absorb(jacobian_mismatch(G.mul, ab, tol), witness_of("Tm", {&a, &b}));
      ++used;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EvaluationOutsideDomain) throw;
    }
  }
  rep.samples = used;
  rep.finalize(tol.tol_fd);
  return rep;
}

Report morphism_check(const GroupoidMorphism& m, std::size_t n_samples, std::uint64_t seed, const Tolerances& tol) {
  const Groupoid& G = *m.total;
  const Groupoid& H = *m.base;
  Report rep;
  rep.check = "morphism:" + m.name;
  rep.seed = seed;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Point x = G.sample_object(seed, i);
    const Point g = G.sample_arrow(seed, i);
    const auto [a, b] = G.sample_pair(seed, i);
    rep.absorb(H.arrows.distance(m.arrow_map(G.unit(x)), H.unit(m.object_map(x))),
               witness_of("pi(u(x)) = u(pi0(x))", {&x}));
    const Point pg = m.arrow_map(g);
    rep.absorb(H.objects.distance(H.src(pg), m.object_map(G.src(g))), witness_of("s(pi(g)) = pi0(s(g))", {&g}));
    rep.absorb(H.objects.distance(H.tgt(pg), m.object_map(G.tgt(g))), witness_of("t(pi(g)) = pi0(t(g))", {&g}));
    rep.absorb(H.arrows.distance(m.arrow_map(G.inv(g)), H.inv(pg)), witness_of("pi(i(g)) = i(pi(g))", {&g}));
    rep.absorb(H.arrows.distance(m.arrow_map(G.multiply(a, b)), H.multiply(m.arrow_map(a), m.arrow_map(b))),
               witness_of("pi(gh) = pi(g) pi(h)", {&a, &b}));
  }
  rep.samples = n_samples;
  rep.finalize(tol.tol_alg);
  return rep;
}

namespace {

// Gauss-Newton on [pi(g) - h; s(g) - x] from a point of the source fibre.
double refine_cover_distance(const GroupoidMorphism& m, Point g, const Point& h, const Point& x,
                             const Tolerances& tol) {
  const Groupoid& G = *m.total;
  const Groupoid& H = *m.base;
  auto distance = [&](const Point& q) {
    return H.arrows.distance(m.arrow_map(q), h) + G.objects.distance(G.src(q), x);
  };
  double best = distance(g);
  if (!std::isfinite(best)) return best;
  for (int it = 0; it < 12 && best > 1e-14; ++it) {
    const Point pg = m.arrow_map(g);
    const Point sg = G.src(g);
    Eigen::VectorXd r(pg.coords.size() + sg.coords.size());
    r << H.arrows.difference(pg, h), G.objects.difference(sg, x);
    const Eigen::MatrixXd J = stack({jacobian(m.arrow_map, g, tol), jacobian(G.src, g, tol)});
    const Eigen::VectorXd step = J.completeOrthogonalDecomposition().solve(-r);
    const Point next = G.arrows.advance(g, step);
    if (!G.admits_arrow(next)) break;
    const double d = distance(next);
    if (!(d < best)) break;
    best = d;
    g = next;
  }
  return best;
}

}  // namespace

FibrationVerdict fibration_probe(const GroupoidMorphism& m, std::size_t n_samples, std::uint64_t seed,
                                 const Tolerances& tol, std::size_t fiber_samples) {
  const Groupoid& G = *m.total;
  const Groupoid& H = *m.base;
  FibrationVerdict v;
  v.seed = seed;
  v.samples = n_samples;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Point g = G.sample_arrow(seed, i);
    const Point pg = m.arrow_map(g);
    const Point sg = G.src(g);
    const Point tg = G.tgt(g);
    const int dim_h = H.arrows.dim(pg.patch);
    const int dim_m = G.objects.dim(sg.patch);
    const int dim_n = H.objects.dim(m.object_map(sg).patch);
    const Eigen::MatrixXd Dpi = jacobian(m.arrow_map, g, tol);
    const Eigen::MatrixXd Ds = jacobian(G.src, g, tol);
    const Eigen::MatrixXd Dt = jacobian(G.tgt, g, tol);
    v.min_sv_submersion = std::min(v.min_sv_submersion, kth_singular_value(Dpi, dim_h));
    v.min_sv_shriek = std::min(v.min_sv_shriek, kth_singular_value(stack({Dpi, Ds}), dim_h + dim_m - dim_n));
    v.min_sv_uniform =
        std::min(v.min_sv_uniform, kth_singular_value(stack({Dt, Dpi, Ds}), 2 * dim_m + dim_h - 2 * dim_n));
  }
  v.submersion_ok = v.min_sv_submersion > tol.sv_tol;
  v.shriek_submersion_ok = v.min_sv_shriek > tol.sv_tol;
  v.uniform_ok = v.min_sv_uniform > tol.sv_tol;

  std::vector<Point> objects = G.landmark_objects;
  for (std::size_t i = 0; i < n_samples; ++i) objects.push_back(G.sample_object(seed, i));
  for (std::size_t oi = 0; oi < objects.size(); ++oi) {
    const Point& x = objects[oi];
    const Point n = m.object_map(x);
    std::vector<Point> starts;
    for (std::size_t l = 0; l < fiber_samples; ++l) starts.push_back(G.sample_sfiber(x, seed, oi * fiber_samples + l));
    for (std::size_t j = 0; j < fiber_samples; ++j) {
      const Point h = H.sample_sfiber(n, seed + 1, oi * fiber_samples + j);
      std::vector<std::pair<double, std::size_t>> initial;
      for (std::size_t l = 0; l < starts.size(); ++l) {
        initial.emplace_back(H.arrows.distance(m.arrow_map(starts[l]), h), l);
      }
      std::sort(initial.begin(), initial.end());
      double best = kInf;
      for (std::size_t c = 0; c < std::min<std::size_t>(3, initial.size()); ++c) {
        if (!std::isfinite(initial[c].first)) break;
        best = std::min(best, refine_cover_distance(m, starts[initial[c].second], h, x, tol));
      }
      if (!v.uncovered_witness || best > v.worst_uncovered_distance) {
        v.worst_uncovered_distance = best;
        Witness w{"no source-fibre arrow over h at x", flatten(x)};
        const auto fh = flatten(h);
        w.coords.insert(w.coords.end(), fh.begin(), fh.end());
        v.uncovered_witness = w;
      }
    }
  }
  v.star_surjective_heuristic = v.worst_uncovered_distance < tol.cover_tol;
  return v;
}

GroupoidPtr with_corrupted_mul(const GroupoidPtr& g, double offset) {
  auto out = std::make_shared<Groupoid>(*g);
  out->name = g->name + "[corrupted mul]";
  const SmoothMap orig = g->mul;
  const Space codomain = g->arrows;
  out->mul.eval = [orig, codomain, offset](const Point& p) {
    Point q = orig(p);
    return codomain.advance(q, Eigen::VectorXd::Constant(q.coords.size(), offset));
  };
  return out;
}

MorphismPtr with_corrupted_object_map(const MorphismPtr& m, double offset) {
  auto out = std::make_shared<GroupoidMorphism>(*m);
  out->name = m->name + "[corrupted pi0]";
  const SmoothMap orig = m->object_map;
  const Space codomain = m->base->objects;
  out->object_map.eval = [orig, codomain, offset](const Point& p) {
    Point q = orig(p);
    return codomain.advance(q, Eigen::VectorXd::Constant(q.coords.size(), offset));
  };
  return out;
}

}  // namespace mec
