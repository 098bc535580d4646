#include "mec/transport.hpp"

#include <algorithm>
#include <array>

#include "mec/error.hpp"

namespace mec {

namespace {

constexpr std::array<double, 2> kInterior{1.0 / 3.0, 2.0 / 3.0};
constexpr std::array<double, 3> kClauseTimes{1.0 / 3.0, 2.0 / 3.0, 1.0};

Witness point_witness(std::string what, std::initializer_list<Point> pts) {
  Witness w{std::move(what), {}};
  for (const auto& p : pts) {
    const auto f = flatten(p);
    w.coords.insert(w.coords.end(), f.begin(), f.end());
  }
  return w;
}

TransportOutcome finish(TrajectoryOutcome tr, const Space& base, const SmoothMap& proj, const BasePath& path) {
  TransportOutcome out;
  for (const auto& [t, p] : tr.samples) out.drift = std::max(out.drift, base.distance(proj(p), path.at(t)));
  if (tr.completed()) out.end = tr.end();
  out.trajectory = std::move(tr);
  return out;
}

BasePath rescaled(BasePath p, double speed) {
  if (speed == 1.0) return p;
  p.at = [f = p.at, speed](double t) { return f(speed * t); };
  p.velocity = [v = p.velocity, speed](double t) -> Eigen::VectorXd { return speed * v(speed * t); };
  p.is_loop = false;
  return p;
}

}  // namespace

TransportOutcome parallel_transport(const Connection& c, const BasePath& gamma, const Point& g, double t1,
                                    const Tolerances& tol, std::span<const double> output_times) {
  const GroupoidMorphism& m = *c.morphism;
  const GroupoidPtr G = m.total;
  const Space& B = m.base->arrows;
  if (!(B.distance(m.arrow_map(g), gamma.at(0.0)) < tol.tol_compose)) {
    throw Error(ErrorCode::StartFiberMismatch, "start arrow does not lie over the start of the path");
  }
  const HorLift& hor = c.hor;
  const VectorField field = [&](double t, const Point& p) { return hor(p, gamma.velocity(t)); };
  const DomainGuard guard = [&G](const Point& p) { return G->admits_arrow(p); };
  return finish(integrate(G->arrows, field, g, t1, guard, tol, output_times), B, m.arrow_map, gamma);
}

TransportOutcome object_transport(const Connection& c, const BasePath& delta, const Point& x, double t1,
                                  const Tolerances& tol, std::span<const double> output_times) {
  const GroupoidMorphism& m = *c.morphism;
  const GroupoidPtr G = m.total;
  const Space& N = m.base->objects;
  if (!(N.distance(m.object_map(x), delta.at(0.0)) < tol.tol_compose)) {
    throw Error(ErrorCode::StartFiberMismatch, "start object does not lie over the start of the path");
  }
  const BaseLift& hor0 = c.hor0;
  const VectorField field = [&](double t, const Point& p) { return hor0(p, delta.velocity(t)); };
  const DomainGuard guard = [&G](const Point& p) { return G->admits_object(p); };
  return finish(integrate(G->objects, field, x, t1, guard, tol, output_times), N, m.object_map, delta);
}

HolonomyResult holonomy(const Connection& c, const BasePath& loop, const std::vector<Point>& starts,
                        const Tolerances& tol) {
  const Space& B = c.morphism->base->arrows;
  const Space& A = c.morphism->total->arrows;
  if (!(B.distance(loop.at(0.0), loop.at(1.0)) <= tol.tol_compose)) {
    throw Error(ErrorCode::NotALoop, "path does not close up");
  }
  HolonomyResult out;
  out.deviation.check = "holonomy_deviation";
  out.reverse_identity.check = "holonomy_reverse";
  const BasePath back = reverse(loop);
  for (const auto& g : starts) {
    TransportOutcome there = parallel_transport(c, loop, g, 1.0, tol);
    if (!there.completed()) {
      ++out.escaped;
      out.images.push_back(std::move(there));
      continue;
    }
    const Point end = *there.end;
    out.deviation.absorb(A.distance(end, g), point_witness("tau_gamma(g) = g", {g}));
    const TransportOutcome home = parallel_transport(c, back, end, 1.0, tol);
    if (home.completed()) {
      out.reverse_identity.absorb(A.distance(*home.end, g), point_witness("tau_reverse(tau(g)) = g", {g}));
    } else {
      ++out.escaped;
    }
    out.images.push_back(std::move(there));
  }
  out.deviation.samples = out.reverse_identity.samples = starts.size();
  out.deviation.finalize(tol.hol_tol);
  out.reverse_identity.finalize(tol.hol_tol);
  return out;
}

const char* to_string(ProbeKind kind) {
  return kind == ProbeKind::NoCounterexampleFound ? "NoCounterexampleFound" : "IncompleteWitness";
}

namespace {

template <typename Transport>
CompletenessVerdict run_probe(const PathFamily& paths, std::size_t budget, std::uint64_t seed, Transport&& go) {
  CompletenessVerdict v;
  v.budget = budget;
  v.seed = seed;
  for (std::size_t i = 0; i < budget; ++i) {
    const ProbeSample s = paths(seed, i);
    const TransportOutcome o = go(s);
    ++v.attempted;
    if (!o.completed()) {
      v.kind = ProbeKind::IncompleteWitness;
      v.path_index = i;
      v.start = s.start;
      v.escape_time = o.trajectory.escape_time;
      v.reason = o.trajectory.escape_reason;
      break;
    }
  }
  return v;
}

}  // namespace

CompletenessVerdict completeness_probe(const Connection& c, const PathFamily& paths, std::size_t budget,
                                       std::uint64_t seed, const Tolerances& tol) {
  return run_probe(paths, budget, seed,
                   [&](const ProbeSample& s) { return parallel_transport(c, s.path, s.start, 1.0, tol); });
}

CompletenessVerdict base_completeness_probe(const Connection& c, const PathFamily& paths, std::size_t budget,
                                            std::uint64_t seed, const Tolerances& tol) {
  return run_probe(paths, budget, seed,
                   [&](const ProbeSample& s) { return object_transport(c, s.path, s.start, 1.0, tol); });
}

PathFamily random_arrow_paths(const Connection& c, double speed) {
  const MorphismPtr m = c.morphism;
  return [m, speed](std::uint64_t seed, std::uint64_t i) {
    const Point g = m->total->sample_arrow(seed, i);
    return ProbeSample{rescaled(m->base->arrow_path(m->arrow_map(g), seed, i), speed), g};
  };
}

PathFamily random_object_paths(const Connection& c, double speed) {
  const MorphismPtr m = c.morphism;
  return [m, speed](std::uint64_t seed, std::uint64_t i) {
    const Point x = m->total->sample_object(seed, i);
    return ProbeSample{rescaled(m->base->object_path(m->object_map(x), seed, i), speed), x};
  };
}

PathFamily interleave(PathFamily a, PathFamily b) {
  return [a = std::move(a), b = std::move(b)](std::uint64_t seed, std::uint64_t i) {
    return i % 2 == 0 ? a(seed, i / 2) : b(seed, i / 2);
  };
}

double TransportMultiplicativityReport::worst() const {
  return std::max({source.worst_residual, target.worst_residual, inverse.worst_residual, product.worst_residual,
                   unit.worst_residual});
}

std::string TransportMultiplicativityReport::worst_clause() const {
  const Report* best = &source;
  for (const Report* r : {&target, &inverse, &product, &unit}) {
    if (r->worst_residual > best->worst_residual) best = r;
  }
  return best->check;
}

TransportMultiplicativityReport transport_multiplicativity_check(const Connection& c, std::size_t n_pairs,
                                                                 std::uint64_t seed, const Tolerances& tol,
                                                                 const std::vector<PinnedPathPair>& pinned) {
  const GroupoidMorphism& m = *c.morphism;
  const Groupoid& G = *m.total;
  const Groupoid& H = *m.base;
  TransportMultiplicativityReport rep;
  rep.source.check = "source";
  rep.target.check = "target";
  rep.inverse.check = "inverse";
  rep.product.check = "product";
  rep.unit.check = "unit";

  auto arrow = [&](const BasePath& p, const Point& g) { return parallel_transport(c, p, g, 1.0, tol, kInterior); };
  auto object = [&](const BasePath& p, const Point& x) { return object_transport(c, p, x, 1.0, tol, kInterior); };
  auto at = [&](const TransportOutcome& o, double t) { return *o.trajectory.at(t, tol.tol_time); };

  auto arrow_pair = [&](const Point& g, const Point& k, const BasePath& gamma, const BasePath& eta) {
    const TransportOutcome tg = arrow(gamma, g);
    const TransportOutcome tk = arrow(eta, k);
    const TransportOutcome ts = object(push_forward(H.src, gamma, tol), G.src(g));
    const TransportOutcome tt = object(push_forward(H.tgt, gamma, tol), G.tgt(g));
    const TransportOutcome ti = arrow(push_forward(H.inv, gamma, tol), G.inv(g));
    const TransportOutcome tm = arrow(push_forward_pair(H.mul, gamma, eta, tol), G.multiply(g, k));
    for (const auto* o : {&tg, &tk, &ts, &tt, &ti, &tm}) {
      if (!o->completed()) {
        ++rep.inconclusive;
        return;
      }
    }
    ++rep.completed;
    for (double t : kClauseTimes) {
      const Point a = at(tg, t);
      const Point b = at(tk, t);
      rep.source.absorb(G.objects.distance(G.src(a), at(ts, t)), point_witness("s(tau(g)) = tau(s(g))", {g, k}));
      rep.target.absorb(G.objects.distance(G.tgt(a), at(tt, t)), point_witness("t(tau(g)) = tau(t(g))", {g, k}));
      rep.inverse.absorb(G.arrows.distance(G.inv(a), at(ti, t)), point_witness("i(tau(g)) = tau(i(g))", {g, k}));
      rep.product.absorb(G.arrows.distance(G.multiply(a, b), at(tm, t)),
                         point_witness("m(tau(g), tau(k)) = tau(m(g, k))", {g, k}));
    }
  };

  for (const auto& p : pinned) arrow_pair(p.g, p.h, p.gamma, p.eta);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const auto [g, k] = G.sample_pair(seed, i);
    const auto [gamma, eta] = H.pair_paths(m.arrow_map(g), m.arrow_map(k), seed, i);
    arrow_pair(g, k, gamma, eta);

    const Point x = G.sample_object(seed, i);
    const BasePath delta = H.object_path(m.object_map(x), seed, i);
    const TransportOutcome tx = object(delta, x);
    const TransportOutcome tu = arrow(push_forward(H.unit, delta, tol), G.unit(x));
    if (!tx.completed() || !tu.completed()) {
      ++rep.inconclusive;
      continue;
    }
    for (double t : kClauseTimes) {
      rep.unit.absorb(G.arrows.distance(G.unit(at(tx, t)), at(tu, t)), point_witness("u(tau(x)) = tau(u(x))", {x}));
    }
  }
  for (Report* r : {&rep.source, &rep.target, &rep.inverse, &rep.product, &rep.unit}) {
    r->samples = rep.completed;
    r->seed = seed;
    r->finalize(tol.tol_mult);
  }
  rep.verdict = rep.completed == 0 ? MultVerdict::Inconclusive : classify(rep.worst(), tol.tol_mult);
  return rep;
}

CurrentGroupoidReport current_groupoid_check(const Connection& c, std::size_t n_samples, std::uint64_t seed,
                                             const Tolerances& tol) {
  const GroupoidMorphism& m = *c.morphism;
  const Groupoid& G = *m.total;
  const Groupoid& H = *m.base;
  CurrentGroupoidReport rep;
  rep.injectivity.check = "current_injectivity";
  rep.reconstruction.check = "current_reconstruction";
  Tolerances fine = tol;
  fine.h_ode = 0.5 * tol.h_ode;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Point g = G.sample_arrow(seed, i);
    const BasePath gamma = H.arrow_path(m.arrow_map(g), seed, i);
    const TransportOutcome tau = parallel_transport(c, gamma, g, 1.0, tol, kInterior);
    const Point start = tau.trajectory.samples.front().second;
    rep.injectivity.absorb(std::max(tau.drift, G.arrows.distance(start, g)),
                           point_witness("(pi o tau, tau(0)) = (gamma, g)", {g}));
    if (!tau.completed()) {
      ++rep.escaped;
      rep.surjectivity_applicable = false;
      continue;
    }
    const TransportOutcome again = parallel_transport(c, gamma, start, 1.0, fine, kInterior);
    if (!again.completed()) {
      rep.reconstruction.absorb(kInf, point_witness("reconstruction escaped", {g}));
      continue;
    }
    for (double t : kClauseTimes) {
      rep.reconstruction.absorb(G.arrows.distance(*tau.trajectory.at(t, tol.tol_time), *again.trajectory.at(t, tol.tol_time)),
                                point_witness("tau rebuilt from (pi o tau, tau(0))", {g}));
    }
  }
  rep.injectivity.samples = n_samples;
  rep.reconstruction.samples = n_samples - rep.escaped;
  rep.injectivity.finalize(tol.drift_tol);
  rep.reconstruction.finalize(tol.drift_tol);
  return rep;
}

ConsistencyReport theorem_crosscheck_kernel(const Connection& c, const CrosscheckInput& in, std::size_t budget,
                                            std::uint64_t seed, const Tolerances& tol) {
  ConsistencyReport r;
  r.fibration = in.fibration;
  r.kernel_source_connected = in.kernel_source_connected;
  r.base_source_connected = c.morphism->base->traits.source_connected;
  r.total = completeness_probe(c, in.total_paths, budget, seed, tol);
  r.kernel = completeness_probe(kernel_connection(c, tol), in.kernel_paths, budget, seed, tol);
  r.base = base_completeness_probe(c, in.base_paths, budget, seed, tol);

  const bool T = r.total.kind == ProbeKind::NoCounterexampleFound;
  const bool K = r.kernel.kind == ProbeKind::NoCounterexampleFound;
  const bool B = r.base.kind == ProbeKind::NoCounterexampleFound;
  auto flag = [&r](bool pre, bool contradiction, const std::string& what, const std::string& missing) {
    if (!contradiction) return;
    if (pre) {
      r.violations.push_back(what);
    } else {
      r.notes.push_back(what + " (not applicable: " + missing + ")");
    }
  };
  flag(r.fibration, K && !T, "kernel complete but total incomplete", "not a fibration");
  flag(true, T && !K, "total complete but kernel incomplete", "");
  flag(true, T && !B, "total complete but base incomplete", "");
  flag(r.fibration && r.kernel_source_connected, B && !T, "base complete but total incomplete",
       r.fibration ? "kernel not source-connected" : "not a fibration");
  flag(r.base_source_connected, T && !r.fibration, "complete on a source-connected base but not a fibration",
       "base not source-connected");
  return r;
}

void dump_trajectory(std::ostream& os, const TrajectoryOutcome& tr) {
  for (const auto& [t, p] : tr.samples) {
    os << format_real(t);
    for (double v : flatten(p)) os << ' ' << format_real(v);
    os << '\n';
  }
}

}  // namespace mec
