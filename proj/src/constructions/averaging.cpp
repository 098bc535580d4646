#include <algorithm>

#include "mec/constructions.hpp"
#include "mec/error.hpp"
#include "mec/linalg.hpp"

namespace mec {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Witness at_points(std::string what, std::initializer_list<Point> pts) {
  Witness w{std::move(what), {}};
  for (const auto& p : pts) {
    const auto f = flatten(p);
    w.coords.insert(w.coords.end(), f.begin(), f.end());
  }
  return w;
}

}  // namespace

Connection morita_connection(const MorphismPtr& m, const BaseLift& hor0, const Tolerances& tol) {
  const GroupoidPtr G = m->total;
  const GroupoidPtr H = m->base;
  const int dn = H->objects.dim(0);
  const int k = G->objects.dim(0) - dn;
  for (std::uint64_t i = 0; i < 16; ++i) {
    const Point x = G->sample_object(0, i);
    if (numerical_rank(jacobian(m->object_map, x, tol), tol.rank_tol) < dn) {
      throw Error(ErrorCode::NotASubmersion, "object map drops rank at a sampled object");
    }
  }
  const SmoothMap pi = m->arrow_map;
  Connection c;
  c.morphism = m;
  c.provenance = "morita";
  c.claimed_multiplicative = true;
  c.hor0 = hor0;
  c.hor = [G, H, pi, hor0, k, tol](const Point& g, const VectorXd& a) -> VectorXd {
    const Point h = pi(g);
    const VectorXd vt = hor0(G->tgt(g), jacobian(H->tgt, h, tol) * a);
    const VectorXd vs = hor0(G->src(g), jacobian(H->src, h, tol) * a);
    VectorXd out(2 * k + a.size());
    out << vt.tail(k), a, vs.tail(k);
    return out;
  };
  return c;
}

Report compare_connections(const Connection& a, const Connection& b, std::size_t n_samples, std::uint64_t seed,
                           const Tolerances& tol) {
  const GroupoidMorphism& m = *a.morphism;
  Report rep;
  rep.check = "connection_difference";
  rep.seed = seed;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Point g = m.total->sample_arrow(seed, i);
    const int dh = m.base->arrows.dim(m.arrow_map(g).patch);
    for (int j = 0; j < dh; ++j) {
      const VectorXd e = VectorXd::Unit(dh, j);
      rep.absorb((a.hor(g, e) - b.hor(g, e)).norm(), at_points("hor_a(g, e) = hor_b(g, e)", {g}));
    }
    const Point x = m.total->sample_object(seed, i);
    const int dn = m.base->objects.dim(m.object_map(x).patch);
    for (int j = 0; j < dn; ++j) {
      const VectorXd e = VectorXd::Unit(dn, j);
      rep.absorb((a.hor0(x, e) - b.hor0(x, e)).norm(), at_points("hor0_a(x, e) = hor0_b(x, e)", {x}));
    }
  }
  rep.samples = n_samples;
  rep.finalize(tol.tol_alg);
  return rep;
}

Report projectability_check(const Groupoid& G, const ArrowField& X, std::size_t n_samples, std::uint64_t seed,
                            const Tolerances& tol) {
  Report rep;
  rep.check = "s_projectable";
  rep.seed = seed;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Point g = G.sample_arrow(seed, i);
    const Point k = G.sample_sfiber(G.src(g), seed, i);
    const VectorXd a = jacobian(G.src, g, tol) * X(g);
    const VectorXd b = jacobian(G.src, k, tol) * X(k);
    rep.absorb((a - b).norm(), at_points("Ts X constant on source fibres", {g, k}));
  }
  rep.samples = n_samples;
  rep.finalize(tol.tol_alg);
  if (!rep.pass) throw Error(ErrorCode::NonProjectableInput, "Ts X varies along a source fibre");
  return rep;
}

AveragedField haar_average(const GroupoidPtr& Gp, const ArrowField& X, int nodes, std::size_t n_samples,
                           std::uint64_t seed, const Tolerances& tol) {
  const Groupoid& G = *Gp;
  if (!G.haar) throw Error(ErrorCode::QuadratureMissing, G.name + " carries no fibre quadrature");
  projectability_check(G, X, 16, seed, tol);
  AveragedField out;
  out.arrows = [Gp, X, nodes, tol](const Point& g) -> VectorXd {
    const Groupoid& G = *Gp;
    VectorXd acc = VectorXd::Zero(g.coords.size());
    for (const HaarNode& node : G.haar(G.src(g), nodes)) {
      const Point& h = node.arrow;
      const Point gh = G.multiply(g, h);
      const Point hi = G.inv(h);
      const VectorXd a = X(gh);
      const VectorXd b = jacobian(G.inv, h, tol) * X(h);
      VectorXd ab(a.size() + b.size());
      ab << a, b;
      acc += node.weight * (G.mul_jacobian(gh, hi, tol) * ab);
    }
    return acc;
  };
  const ArrowField Xhat = out.arrows;
  out.objects = [Gp, Xhat, tol](const Point& x) -> VectorXd {
    const Point u = Gp->unit(x);
    return jacobian(Gp->src, u, tol) * Xhat(u);
  };
  out.report = multiplicative_field_check(G, out.arrows, out.objects, n_samples, seed, tol);
  out.report.check = "averaged_field:" + G.name;
  return out;
}

double field_distance(const Groupoid& G, const ArrowField& X, const ArrowField& Y, std::size_t n_samples,
                      std::uint64_t seed) {
  double worst = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Point g = G.sample_arrow(seed, i);
    worst = std::max(worst, (X(g) - Y(g)).norm());
  }
  return worst;
}

Connection proper_family_connection(const MorphismPtr& family, const BaseLift& hor0, const BaseLift& hor_s,
                                    int nodes, const Tolerances& tol) {
  if (!family->is_family()) throw Error(ErrorCode::NotAFamily, family->name + " is not a family");
  const GroupoidPtr G = family->total;
  const int d = family->base->objects.dim(0);
  std::vector<AveragedField> fields;
  for (int i = 0; i < d; ++i) {
    const ArrowField Xi = [G, hor0, hor_s, i, d](const Point& g) {
      const Point x = G->src(g);
      return hor_s(g, hor0(x, VectorXd::Unit(d, i)));
    };
    fields.push_back(haar_average(G, Xi, nodes, 0, 0, tol));
  }
  Connection c;
  c.morphism = family;
  c.provenance = "proper_family";
  c.claimed_multiplicative = true;
  c.hor = [fields](const Point& g, const VectorXd& w) -> VectorXd {
    VectorXd v = VectorXd::Zero(g.coords.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (w[static_cast<Eigen::Index>(i)] != 0.0) v += w[static_cast<Eigen::Index>(i)] * fields[i].arrows(g);
    }
    return v;
  };
  c.hor0 = [fields](const Point& x, const VectorXd& w) -> VectorXd {
    VectorXd v = VectorXd::Zero(x.coords.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (w[static_cast<Eigen::Index>(i)] != 0.0) v += w[static_cast<Eigen::Index>(i)] * fields[i].objects(x);
    }
    return v;
  };
  return c;
}

}  // namespace mec
