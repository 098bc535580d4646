#include "mec/connection.hpp"

#include <algorithm>
#include <cmath>

#include "mec/catalog.hpp"
#include "mec/error.hpp"
#include "mec/linalg.hpp"
#include "mec/random.hpp"

namespace mec {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Witness make_witness(std::string what, std::initializer_list<Point> pts, std::initializer_list<VectorXd> vecs = {}) {
  Witness w{std::move(what), {}};
  for (const auto& p : pts) {
    const auto f = flatten(p);
    w.coords.insert(w.coords.end(), f.begin(), f.end());
  }
  for (const auto& v : vecs) {
    for (Eigen::Index i = 0; i < v.size(); ++i) w.coords.push_back(v[i]);
  }
  return w;
}

// Coordinate basis vectors followed by `extra` random normal vectors.
std::vector<VectorXd> probe_vectors(int dim, Rng& rng, int extra) {
  std::vector<VectorXd> out;
  for (int i = 0; i < dim; ++i) out.push_back(VectorXd::Unit(dim, i));
  if (dim > 0) {
    for (int k = 0; k < extra; ++k) out.push_back(normal_vector(rng, dim));
  }
  return out;
}

int base_arrow_dim(const Connection& c, const Point& g) {
  const GroupoidMorphism& m = *c.morphism;
  return m.base->arrows.dim(m.arrow_map(g).patch);
}

int base_object_dim(const Connection& c, const Point& x) {
  const GroupoidMorphism& m = *c.morphism;
  return m.base->objects.dim(m.object_map(x).patch);
}

}  // namespace

MatrixXd Connection::frame(const Point& g) const {
  const int d = base_arrow_dim(*this, g);
  MatrixXd out(g.coords.size(), d);
  for (int i = 0; i < d; ++i) out.col(i) = hor(g, VectorXd::Unit(d, i));
  return out;
}

MatrixXd Connection::base_frame(const Point& x) const {
  const int d = base_object_dim(*this, x);
  MatrixXd out(x.coords.size(), d);
  for (int i = 0; i < d; ++i) out.col(i) = hor0(x, VectorXd::Unit(d, i));
  return out;
}

Report complement_check(const Connection& c, std::size_t n_samples, std::uint64_t seed, const Tolerances& tol) {
  const GroupoidMorphism& m = *c.morphism;
  const Groupoid& G = *m.total;
  Report rep;
  rep.check = "complement:" + c.provenance;
  rep.seed = seed;
  for (std::size_t i = 0; i < n_samples; ++i) {
    Rng rng = make_rng(seed, i, 31);
    const Point g = G.sample_arrow(seed, i);
    const MatrixXd Dpi = jacobian(m.arrow_map, g, tol);
    const MatrixXd Hm = c.frame(g);
    const auto dh = Hm.cols();
    if (numerical_rank(Hm, tol.rank_tol) < dh) {
      throw Error(ErrorCode::RankDeficientLift, "horizontal lift loses rank at an arrow of " + G.name);
    }
    rep.absorb((Dpi * Hm - MatrixXd::Identity(dh, dh)).cwiseAbs().maxCoeff(),
               make_witness("T pi o hor = id", {g}));
    if (dh > 0) {
      const VectorXd a = normal_vector(rng, static_cast<int>(dh));
      const VectorXd b = normal_vector(rng, static_cast<int>(dh));
      const double alpha = standard_normal(rng);
      const VectorXd lin = c.hor(g, alpha * a + b) - alpha * c.hor(g, a) - c.hor(g, b);
      rep.absorb(lin.cwiseAbs().maxCoeff(), make_witness("hor is linear", {g}, {a, b}));
    }
    const MatrixXd ker = null_space(Dpi, tol.rank_tol);
    if (numerical_rank(Hm, tol.rank_tol) + ker.cols() != g.coords.size()) {
      rep.absorb(kInf, make_witness("dim im hor + dim ker T pi = dim T_g G", {g}));
    }
    if (ker.cols() > 0 && dh > 0 && min_principal_angle(Hm, ker, tol.rank_tol) <= tol.angle_tol) {
      rep.absorb(kInf, make_witness("im hor meets ker T pi", {g}));
    }

    const Point x = G.sample_object(seed, i);
    const MatrixXd D0 = jacobian(m.object_map, x, tol);
    const MatrixXd H0 = c.base_frame(x);
    if (H0.cols() > 0) {
      rep.absorb((D0 * H0 - MatrixXd::Identity(H0.cols(), H0.cols())).cwiseAbs().maxCoeff(),
                 make_witness("T pi0 o hor0 = id", {x}));
    }
  }
  rep.samples = n_samples;
  rep.finalize(tol.tol_alg);
  return rep;
}

ProductClause product_clause(const Connection& c, const ProductProbe& probe, const Tolerances& tol) {
  const GroupoidMorphism& m = *c.morphism;
  const Groupoid& G = *m.total;
  const Groupoid& H = *m.base;
  const VectorXd u = c.hor(probe.g, probe.a);
  const VectorXd v = c.hor(probe.h, probe.b);
  VectorXd uv(u.size() + v.size());
  uv << u, v;
  VectorXd ab(probe.a.size() + probe.b.size());
  ab << probe.a, probe.b;
  const Point gh = G.multiply(probe.g, probe.h);
  const VectorXd base = H.mul_jacobian(m.arrow_map(probe.g), m.arrow_map(probe.h), tol) * ab;
  return {G.mul_jacobian(probe.g, probe.h, tol) * uv, c.hor(gh, base)};
}

std::vector<std::pair<VectorXd, VectorXd>> composable_base_tangents(const Connection& c, const Point& g,
                                                                   const Point& h, std::uint64_t seed,
                                                                   std::uint64_t index, const Tolerances& tol) {
  const GroupoidMorphism& m = *c.morphism;
  const Groupoid& H = *m.base;
  const Point pg = m.arrow_map(g);
  const Point ph = m.arrow_map(h);
  const MatrixXd Ts = jacobian(H.src, pg, tol);
  const MatrixXd Tt = jacobian(H.tgt, ph, tol);
  MatrixXd constraint(Ts.rows(), Ts.cols() + Tt.cols());
  constraint << Ts, -Tt;
  const MatrixXd basis = null_space(constraint, tol.rank_tol);
  std::vector<std::pair<VectorXd, VectorXd>> out;
  if (basis.cols() == 0) return out;
  Rng rng = make_rng(seed, index, 33);
  auto push = [&](const VectorXd& k) {
    const VectorXd ab = basis * k;
    out.emplace_back(ab.head(Ts.cols()), ab.tail(Tt.cols()));
  };
  for (Eigen::Index j = 0; j < basis.cols(); ++j) push(VectorXd::Unit(basis.cols(), j));
  for (int k = 0; k < 2; ++k) push(normal_vector(rng, static_cast<int>(basis.cols())));
  return out;
}

double MultiplicativityReport::worst() const {
  double w = 0.0;
  for (const Report* r : clauses()) w = std::max(w, r->worst_residual);
  return w;
}

std::string MultiplicativityReport::worst_clause() const {
  const Report* best = clauses()[0];
  for (const Report* r : clauses()) {
    if (r->worst_residual > best->worst_residual) best = r;
  }
  return best->check;
}

MultiplicativityReport multiplicativity_check_pointwise(const Connection& c, std::size_t n_samples,
                                                        std::uint64_t seed, const Tolerances& tol,
                                                        const PointwiseOptions& options) {
  const GroupoidMorphism& m = *c.morphism;
  const Groupoid& G = *m.total;
  const Groupoid& H = *m.base;
  MultiplicativityReport rep;
  rep.source.check = "source";
  rep.target.check = "target";
  rep.unit.check = "unit";
  rep.inverse.check = "inverse";
  rep.product.check = "product";
  rep.base_restriction.check = "base_restriction";

  for (const auto& probe : options.pinned) {
    rep.product.absorb(product_clause(c, probe, tol).residual(),
                       make_witness("Tm(hor a, hor b) = hor Tm_H(a, b)", {probe.g, probe.h}, {probe.a, probe.b}));
  }

  for (std::size_t i = 0; i < n_samples; ++i) {
    Rng rng = make_rng(seed, i, 35);
    const Point g = G.sample_arrow(seed, i);
    const Point pg = m.arrow_map(g);
    const MatrixXd Ts = jacobian(G.src, g, tol);
    const MatrixXd Tt = jacobian(G.tgt, g, tol);
    const MatrixXd Ti = jacobian(G.inv, g, tol);
    const MatrixXd TsH = jacobian(H.src, pg, tol);
    const MatrixXd TtH = jacobian(H.tgt, pg, tol);
    const MatrixXd TiH = jacobian(H.inv, pg, tol);
    const Point sg = G.src(g);
    const Point tg = G.tgt(g);
    const Point gi = G.inv(g);
    for (const auto& a : probe_vectors(H.arrows.dim(pg.patch), rng, 2)) {
      const VectorXd u = c.hor(g, a);
      rep.source.absorb((Ts * u - c.hor0(sg, TsH * a)).norm(), make_witness("Ts hor = hor0 Ts_H", {g}, {a}));
      rep.target.absorb((Tt * u - c.hor0(tg, TtH * a)).norm(), make_witness("Tt hor = hor0 Tt_H", {g}, {a}));
      rep.inverse.absorb((Ti * u - c.hor(gi, TiH * a)).norm(), make_witness("Ti hor = hor Ti_H", {g}, {a}));
    }

    const Point x = G.sample_object(seed, i);
    const Point ux = G.unit(x);
    const Point nx = m.object_map(x);
    const MatrixXd TuG = jacobian(G.unit, x, tol);
    const MatrixXd TuH = jacobian(H.unit, nx, tol);
    for (const auto& w : probe_vectors(H.objects.dim(nx.patch), rng, 2)) {
      rep.unit.absorb((c.hor(ux, TuH * w) - TuG * c.hor0(x, w)).norm(),
                      make_witness("hor_u(x) Tu_H = Tu hor0", {x}, {w}));
    }
    // Hor ∩ TM = Hor0 at the unit, checked in both directions.
    const MatrixXd Hu = c.frame(ux);
    const MatrixXd H0 = c.base_frame(x);
    for (Eigen::Index j = 0; j < H0.cols(); ++j) {
      rep.base_restriction.absorb(subspace_distance(TuG * H0.col(j), Hu, tol.rank_tol),
                                  make_witness("Tu(Hor0) in Hor", {x}));
    }
    const MatrixXd meet = intersect_spans(Hu, TuG, tol.rank_tol);
    for (Eigen::Index j = 0; j < meet.cols(); ++j) {
      const VectorXd y = TuG.completeOrthogonalDecomposition().solve(VectorXd(meet.col(j)));
      rep.base_restriction.absorb(subspace_distance(y, H0, tol.rank_tol), make_witness("Hor meet TM in Hor0", {x}));
    }

    const auto [pa, pb] = G.sample_pair(seed, i);
    for (const auto& [a, b] : composable_base_tangents(c, pa, pb, seed, i, tol)) {
      rep.product.absorb(product_clause(c, {pa, pb, a, b}, tol).residual(),
                         make_witness("Tm(hor a, hor b) = hor Tm_H(a, b)", {pa, pb}, {a, b}));
    }
  }
  for (Report* r : {&rep.source, &rep.target, &rep.unit, &rep.inverse, &rep.product, &rep.base_restriction}) {
    r->samples = n_samples;
    r->seed = seed;
    r->finalize(tol.tol_mult);
  }
  rep.product.samples += options.pinned.size();
  rep.verdict = classify(rep.worst(), tol.tol_mult);
  return rep;
}

Connection kernel_connection(const Connection& c, const Tolerances& tol) {
  const GroupoidMorphism& m = *c.morphism;
  if (!m.kernel) throw Error(ErrorCode::KernelNotExposed, m.name + " exposes no kernel");
  const KernelData kd = *m.kernel;
  const GroupoidPtr H = m.base;
  const HorLift hor = c.hor;
  Connection k;
  k.morphism = kd.family;
  k.provenance = "kernel(" + c.provenance + ")";
  k.claimed_multiplicative = c.claimed_multiplicative;
  k.hor0 = c.hor0;
  k.hor = [kd, H, hor, tol](const Point& q, const VectorXd& w) -> VectorXd {
    const Point g = kd.embed(q);
    const Point n = kd.family->arrow_map(q);
    const VectorXd v = hor(g, jacobian(H->unit, n, tol) * w);
    return jacobian(kd.embed, q, tol).completeOrthogonalDecomposition().solve(v);
  };
  return k;
}

Report kernel_tangency(const Connection& c, std::size_t n_samples, std::uint64_t seed, const Tolerances& tol) {
  const GroupoidMorphism& m = *c.morphism;
  if (!m.kernel) throw Error(ErrorCode::KernelNotExposed, m.name + " exposes no kernel");
  const KernelData& kd = *m.kernel;
  const Groupoid& K = *kd.family->total;
  Report rep;
  rep.check = "kernel_tangency:" + c.provenance;
  rep.seed = seed;
  for (std::size_t i = 0; i < n_samples; ++i) {
    Rng rng = make_rng(seed, i, 37);
    const Point q = K.sample_arrow(seed, i);
    const Point n = kd.family->arrow_map(q);
    const Point g = kd.embed(q);
    const MatrixXd Di = jacobian(kd.embed, q, tol);
    for (const auto& w : probe_vectors(m.base->objects.dim(n.patch), rng, 1)) {
      const VectorXd v = c.hor(g, jacobian(m.base->unit, n, tol) * w);
      const VectorXd z = Di.completeOrthogonalDecomposition().solve(v);
      rep.absorb((Di * z - v).norm(), make_witness("hor(k, Tu_H w) tangent to K", {q}, {w}));
    }
  }
  rep.samples = n_samples;
  rep.finalize(tol.tol_alg);
  return rep;
}

Connection compose_connections(const Connection& c1, const Connection& c2) {
  const GroupoidMorphism& m1 = *c1.morphism;
  const GroupoidMorphism& m2 = *c2.morphism;
  if (m1.base.get() != m2.total.get() && m1.base->name != m2.total->name) {
    throw Error(ErrorCode::IncompatibleMorphisms, m1.name + " and " + m2.name + " do not compose");
  }
  Connection c;
  c.morphism = catalog::compose(c2.morphism, c1.morphism);
  c.provenance = c2.provenance + "o" + c1.provenance;
  c.claimed_multiplicative = c1.claimed_multiplicative && c2.claimed_multiplicative;
  const SmoothMap pi1 = m1.arrow_map;
  const SmoothMap pi01 = m1.object_map;
  const HorLift h1 = c1.hor, h2 = c2.hor;
  const BaseLift b1 = c1.hor0, b2 = c2.hor0;
  c.hor = [=](const Point& g, const VectorXd& a) { return h1(g, h2(pi1(g), a)); };
  c.hor0 = [=](const Point& x, const VectorXd& w) { return b1(x, b2(pi01(x), w)); };
  return c;
}

Connection action_candidate(const MorphismPtr& am, const BaseLift& hor0, const Tolerances& tol) {
  if (!am->action) throw Error(ErrorCode::NotAnActionMorphism, am->name + " is not an action projection");
  Connection cand;
  cand.morphism = am;
  cand.provenance = "action(" + am->name + ")";
  cand.hor0 = hor0;
  const GroupoidPtr Hp = am->base;
  const GroupoidPtr Gp = am->total;
  const SmoothMap pi = am->arrow_map;
  cand.hor = [Hp, Gp, pi, hor0, tol](const Point& g, const VectorXd& a) -> VectorXd {
    const VectorXd w = jacobian(Hp->src, pi(g), tol) * a;
    const VectorXd v = hor0(Gp->src(g), w);
    VectorXd out(a.size() + v.size());
    out << a, v;
    return out;
  };
  return cand;
}

ActionOutcome action_connection(const MorphismPtr& am, const BaseLift& hor0, std::size_t n_samples,
                                std::uint64_t seed, const Tolerances& tol) {
  Connection cand = action_candidate(am, hor0, tol);
  const int gd = am->action->group_dim;
  const GroupoidMorphism& m = *am;
  const Groupoid& G = *m.total;
  const Groupoid& H = *m.base;

  ActionOutcome out;
  out.invariance.check = "action_invariance";
  out.invariance.seed = seed;
  out.lie_algebra.check = "lie_algebra_invariance";
  out.lie_algebra.seed = seed;

  // ρ(ξ) = Tt_G(ξ, 0) at a unit lies over Tt_H ξ, so it is horizontal iff it
  // equals hor0(x, Tt_H ξ).
  auto lie_residual = [&](const Point& x) {
    const Point un = H.unit(m.object_map(x));
    const MatrixXd lie = null_space(jacobian(H.src, un, tol), tol.rank_tol);
    const Point ux = G.unit(x);
    const MatrixXd TtG = jacobian(G.tgt, ux, tol);
    const MatrixXd TtH = jacobian(H.tgt, un, tol);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < lie.cols(); ++j) {
      const VectorXd xi = lie.col(j);
      worst = std::max(worst, (TtG * cand.hor(ux, xi) - hor0(x, TtH * xi)).norm());
    }
    return worst;
  };

  for (const auto& x : G.landmark_objects) {
    out.lie_algebra.absorb(lie_residual(x), make_witness("rho(Lie H) in Hor0", {x}));
  }
  if (!G.landmark_objects.empty()) out.landmark_residual = lie_residual(G.landmark_objects.front());
  for (std::size_t i = 0; i < n_samples; ++i) {
    Rng rng = make_rng(seed, i, 39);
    const Point x = G.sample_object(seed, i);
    out.lie_algebra.absorb(lie_residual(x), make_witness("rho(Lie H) in Hor0", {x}));

    const Point g = G.sample_arrow(seed, i);
    const Point pg = m.arrow_map(g);
    const MatrixXd TtG = jacobian(G.tgt, g, tol);
    const MatrixXd TtH = jacobian(H.tgt, pg, tol);
    const Point tg = G.tgt(g);
    for (const auto& xi : probe_vectors(gd, rng, 1)) {
      out.invariance.absorb((TtG * cand.hor(g, xi) - hor0(tg, TtH * xi)).norm(),
                            make_witness("T a(xi, hor0) in Hor0", {g}, {xi}));
    }
  }
  out.invariance.samples = n_samples;
  out.lie_algebra.samples = n_samples + G.landmark_objects.size();
  out.invariance.finalize(tol.tol_mult);
  out.lie_algebra.finalize(tol.tol_mult);
  if (classify(std::max(out.invariance.worst_residual, out.lie_algebra.worst_residual), tol.tol_mult) ==
      MultVerdict::Multiplicative) {
    cand.claimed_multiplicative = true;
    out.connection = cand;
  }
  return out;
}

Report multiplicative_field_check(const Groupoid& G, const ArrowField& XG, const ObjectField& XM,
                                  std::size_t n_samples, std::uint64_t seed, const Tolerances& tol) {
  Report rep;
  rep.check = "multiplicative_field:" + G.name;
  rep.seed = seed;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Point g = G.sample_arrow(seed, i);
    const VectorXd xg = XG(g);
    rep.absorb((jacobian(G.src, g, tol) * xg - XM(G.src(g))).norm(), make_witness("Ts X = X s", {g}));
    rep.absorb((jacobian(G.tgt, g, tol) * xg - XM(G.tgt(g))).norm(), make_witness("Tt X = X t", {g}));
    const auto [a, b] = G.sample_pair(seed, i);
    const VectorXd xa = XG(a);
    const VectorXd xb = XG(b);
    VectorXd ab(xa.size() + xb.size());
    ab << xa, xb;
    rep.absorb((G.mul_jacobian(a, b, tol) * ab - XG(G.multiply(a, b))).norm(), make_witness("Tm(X, X) = X m", {a, b}));
  }
  rep.samples = n_samples;
  rep.finalize(tol.tol_mult);
  return rep;
}

LiftedField multiplicative_vf_lift(const Connection& c, const ObjectField& X, std::size_t n_samples,
                                   std::uint64_t seed, const Tolerances& tol) {
  if (!c.morphism->is_family()) throw Error(ErrorCode::NotAFamily, c.morphism->name + " is not a family");
  const SmoothMap pi = c.morphism->arrow_map;
  const SmoothMap pi0 = c.morphism->object_map;
  const HorLift hor = c.hor;
  const BaseLift hor0 = c.hor0;
  LiftedField out;
  out.arrows = [=](const Point& g) { return hor(g, X(pi(g))); };
  out.objects = [=](const Point& x) { return hor0(x, X(pi0(x))); };
  out.report = multiplicative_field_check(*c.morphism->total, out.arrows, out.objects, n_samples, seed, tol);
  out.report.check = "lifted_field:" + c.provenance;
  return out;
}

namespace connections {

Connection luca() {
  Connection c;
  c.morphism = catalog::luca();
  c.provenance = "luca";
  c.hor = [](const Point& g, const VectorXd& a) -> VectorXd {
    const double x = g.coords[0];
    VectorXd v(2);
    v << a[0], x * x * a[0];
    return v;
  };
  c.hor0 = [](const Point& x, const VectorXd&) -> VectorXd { return VectorXd::Zero(x.coords.size()); };
  return c;
}

namespace {

VectorXd padded(const VectorXd& head, Eigen::Index size) {
  VectorXd v = VectorXd::Zero(size);
  v.head(head.size()) = head;
  return v;
}

}  // namespace

Connection product(const MorphismPtr& m) {
  Connection c;
  c.morphism = m;
  c.provenance = "product(" + m->name + ")";
  c.claimed_multiplicative = true;
  c.hor = [](const Point& g, const VectorXd& a) { return padded(a, g.coords.size()); };
  c.hor0 = [](const Point& x, const VectorXd& w) { return padded(w, x.coords.size()); };
  return c;
}

Connection pair_product(const MorphismPtr& m) {
  const int dn = m->base->objects.dim(0);
  Connection c;
  c.morphism = m;
  c.provenance = "pair_product(" + m->name + ")";
  c.claimed_multiplicative = true;
  c.hor = [dn](const Point& g, const VectorXd& a) -> VectorXd {
    const auto d = g.coords.size() / 2;
    VectorXd v = VectorXd::Zero(g.coords.size());
    v.head(dn) = a.head(dn);
    v.segment(d, dn) = a.tail(dn);
    return v;
  };
  c.hor0 = [](const Point& x, const VectorXd& w) { return padded(w, x.coords.size()); };
  return c;
}

Connection identity(const MorphismPtr& m) {
  Connection c;
  c.morphism = m;
  c.provenance = "identity(" + m->name + ")";
  c.claimed_multiplicative = true;
  c.hor = [](const Point&, const VectorXd& a) { return a; };
  c.hor0 = [](const Point&, const VectorXd& w) { return w; };
  return c;
}

}  // namespace connections

}  // namespace mec
