#include <algorithm>
#include <cmath>
#include <memory>

#include "mec/catalog.hpp"
#include "mec/constructions.hpp"
#include "mec/error.hpp"
#include "mec/random.hpp"
#include "mec/scenario.hpp"
#include "mec/tangent.hpp"

namespace mec {

using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace cat = catalog;
namespace fx = fixtures;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::vector<double> coords_of(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// ---------------------------------------------------------------- outcome adapters

const Report& worst_of(std::initializer_list<const Report*> reports) {
  const Report* best = *reports.begin();
  for (const Report* r : reports) {
    if (r->worst_residual > best->worst_residual) best = r;
  }
  return *best;
}

CheckOutcome from_pointwise(const MultiplicativityReport& r) {
  CheckOutcome o;
  o.verdict = to_string(r.verdict);
  o.worst_residual = r.worst();
  const auto cl = r.clauses();
  o.witness = worst_of({cl[0], cl[1], cl[2], cl[3], cl[4], cl[5]}).witness;
  o.samples = r.product.samples;
  o.details = {{"worst_clause", r.worst_clause()},
               {"source", format_real(r.source.worst_residual)},
               {"target", format_real(r.target.worst_residual)},
               {"unit", format_real(r.unit.worst_residual)},
               {"inverse", format_real(r.inverse.worst_residual)},
               {"product", format_real(r.product.worst_residual)},
               {"base_restriction", format_real(r.base_restriction.worst_residual)}};
  return o;
}

CheckOutcome from_path(const TransportMultiplicativityReport& r) {
  CheckOutcome o;
  o.verdict = to_string(r.verdict);
  o.worst_residual = r.worst();
  o.witness = worst_of({&r.source, &r.target, &r.inverse, &r.product, &r.unit}).witness;
  o.samples = r.completed + r.inconclusive;
  o.details = {{"worst_clause", r.worst_clause()},
               {"completed", std::to_string(r.completed)},
               {"inconclusive", std::to_string(r.inconclusive)},
               {"source", format_real(r.source.worst_residual)},
               {"target", format_real(r.target.worst_residual)},
               {"inverse", format_real(r.inverse.worst_residual)},
               {"product", format_real(r.product.worst_residual)},
               {"unit", format_real(r.unit.worst_residual)}};
  return o;
}

CheckOutcome pass_fail(const Report& r) {
  CheckOutcome o;
  o.verdict = r.pass ? "Pass" : "Fail";
  o.worst_residual = r.worst_residual;
  o.witness = r.witness;
  o.samples = r.samples;
  if (!r.note.empty()) o.details.emplace_back("note", r.note);
  return o;
}

CheckOutcome threshold(double residual, double bound, std::size_t samples, Details details = {}) {
  CheckOutcome o;
  o.verdict = residual < bound ? "Pass" : "Fail";
  o.worst_residual = residual;
  o.samples = samples;
  o.details = std::move(details);
  o.details.emplace_back("bound", format_real(bound));
  return o;
}

CheckOutcome boolean(bool value, Details details = {}) {
  CheckOutcome o;
  o.verdict = value ? "true" : "false";
  o.details = std::move(details);
  return o;
}

Details probe_details(const CompletenessVerdict& v) {
  Details d{{"kind", to_string(v.kind)}, {"budget", std::to_string(v.budget)},
            {"attempted", std::to_string(v.attempted)}};
  if (v.path_index) d.emplace_back("path_index", std::to_string(*v.path_index));
  if (v.escape_time) d.emplace_back("escape_time", format_real(*v.escape_time));
  if (v.reason) d.emplace_back("escape_reason", to_string(*v.reason));
  return d;
}

CheckOutcome from_probe(const CompletenessVerdict& v) {
  CheckOutcome o;
  o.verdict = to_string(v.kind);
  o.samples = v.attempted;
  o.details = probe_details(v);
  if (v.escape_time) o.worst_residual = *v.escape_time;
  if (v.start) {
    Witness w{"start of the escaping lift (patch " + std::to_string(v.start->patch) + "), then escape time", {}};
    w.coords = flatten(*v.start);
    w.coords.push_back(v.escape_time.value_or(1.0));
    o.witness = w;
  }
  return o;
}

CheckOutcome from_crosscheck(const ConsistencyReport& r) {
  CheckOutcome o;
  o.verdict = r.consistent() ? "Consistent" : "Inconsistent";
  o.samples = r.total.attempted + r.kernel.attempted + r.base.attempted;
  o.worst_residual = static_cast<double>(r.violations.size());
  o.details = {{"total", to_string(r.total.kind)},
               {"kernel", to_string(r.kernel.kind)},
               {"base", to_string(r.base.kind)},
               {"fibration", r.fibration ? "true" : "false"},
               {"kernel_source_connected", r.kernel_source_connected ? "true" : "false"},
               {"base_source_connected", r.base_source_connected ? "true" : "false"}};
  for (std::size_t i = 0; i < r.violations.size(); ++i) o.details.emplace_back("violation" + std::to_string(i), r.violations[i]);
  for (std::size_t i = 0; i < r.notes.size(); ++i) o.details.emplace_back("note" + std::to_string(i), r.notes[i]);
  return o;
}

// ---------------------------------------------------------------- shared helpers

using ConnectionPtr = std::shared_ptr<const Connection>;

// Computes the connection once, on first use.
std::function<Connection()> lazy(std::function<Connection()> make) {
  auto cache = std::make_shared<std::optional<Connection>>();
  return [cache, make = std::move(make)] {
    if (!*cache) *cache = make();
    return **cache;
  };
}

// The two criterion checks every scenario carries on its primary connection.
void add_multiplicativity(ScenarioPlan& plan, const Config& cfg, std::uint64_t seed, const std::string& expected,
                          PointwiseOptions pointwise = {}, std::vector<PinnedPathPair> pinned = {}) {
  const auto primary = plan.primary;
  plan.checks.push_back({"pointwise_multiplicativity", expected, [=] {
                           return from_pointwise(multiplicativity_check_pointwise(
                               primary(), cfg.budget.pointwise_samples, seed, cfg.tol, pointwise));
                         }});
  plan.checks.push_back({"path_multiplicativity", expected, [=] {
                           return from_path(transport_multiplicativity_check(primary(), cfg.budget.path_pairs, seed,
                                                                             cfg.tol, pinned));
                         }});
}

// Starts at -(0.5 + u) and reaches 0 at t = 1/2 along a straight line; u is
// uniform in [0, 1/2].
double aimed_offset(std::uint64_t seed, std::uint64_t i, std::uint64_t salt) {
  Rng rng = make_rng(seed, i, salt);
  return 0.5 + uniform(rng, 0.0, 0.5);
}

// ---------------------------------------------------------------- luca_r2_s1

ScenarioPlan luca_plan(const Config& cfg, std::uint64_t seed) {
  ScenarioPlan plan;
  const auto c = std::make_shared<const Connection>(connections::luca());
  plan.primary = [c] { return *c; };
  const Tolerances tol = cfg.tol;
  const Point g{0, vec({1.0, 0.0})};
  const ProductProbe probe{g, g, vec({1.0}), vec({1.0})};

  plan.checks.push_back({"complement_check", "Pass", [=] {
                           return pass_fail(complement_check(*c, cfg.budget.pointwise_samples, seed, tol));
                         }});
  plan.checks.push_back({"product_clause_witness", "Pass", [=] {
                           const ProductClause pc = product_clause(*c, probe, tol);
                           // b = x^2 a at the product (2, 0) asks for 8; the lifts give 1 + 1.
                           const double off = std::max((pc.produced - vec({2.0, 2.0})).norm(),
                                                       (pc.required - vec({2.0, 8.0})).norm());
                           CheckOutcome o;
                           o.verdict = off < 1e-9 && pc.residual() >= 1.0 ? "Pass" : "Fail";
                           o.worst_residual = pc.residual();
                           o.samples = 1;
                           Witness w{"g = h = (1, 0), a = b = 1; produced then required", {}};
                           w.coords = coords_of(pc.produced);
                           const auto req = coords_of(pc.required);
                           w.coords.insert(w.coords.end(), req.begin(), req.end());
                           o.witness = w;
                           o.details = {{"oracle_offset", format_real(off)}};
                           return o;
                         }});
  const BasePath gamma = linear_path(c->morphism->base->arrows, Point{0, vec({1.0})}, vec({kTwoPi}));
  add_multiplicativity(plan, cfg, seed, "NotMultiplicative", PointwiseOptions{{probe}}, {{g, g, gamma, gamma}});
  return plan;
}

// ---------------------------------------------------------------- so2_action_no_mec

BaseLift zero_lift() {
  return [](const Point& x, const VectorXd&) -> VectorXd { return VectorXd::Zero(x.coords.size()); };
}

CheckOutcome from_action(const ActionOutcome& a) {
  CheckOutcome o;
  o.verdict = a.rejected() ? "Rejection" : "Connection";
  o.worst_residual = std::max(a.invariance.worst_residual, a.lie_algebra.worst_residual);
  o.witness = a.lie_algebra.worst_residual >= a.invariance.worst_residual ? a.lie_algebra.witness
                                                                           : a.invariance.witness;
  o.samples = a.invariance.samples;
  o.details = {{"invariance", format_real(a.invariance.worst_residual)},
               {"lie_algebra", format_real(a.lie_algebra.worst_residual)},
               {"landmark_residual", format_real(a.landmark_residual)}};
  return o;
}

ScenarioPlan so2_plan(const Config& cfg, std::uint64_t seed) {
  ScenarioPlan plan;
  const Tolerances tol = cfg.tol;
  const std::size_t n = cfg.budget.pointwise_samples;
  const auto rotating = cat::action_projection(0, false);
  const auto still = cat::action_projection(0, true);
  auto state = std::make_shared<std::optional<ActionOutcome>>();
  auto trivial = std::make_shared<std::optional<ActionOutcome>>();

  plan.checks.push_back({"action_connection", "Rejection", [=] {
                           *state = action_connection(rotating, zero_lift(), n, seed, tol);
                           return from_action(**state);
                         }});
  plan.checks.push_back({"landmark_residual", "Pass", [=] {
                           if (!*state) *state = action_connection(rotating, zero_lift(), n, seed, tol);
                           // The generator (-y, x) at (1, 0) has length 1 and Hor0 = 0.
                           const double r = (*state)->landmark_residual;
                           return threshold(std::abs(r - 1.0), 1e-6, 1, {{"landmark_residual", format_real(r)}});
                         }});
  plan.checks.push_back({"trivial_action_connection", "Connection", [=] {
                           *trivial = action_connection(still, zero_lift(), n, seed, tol);
                           return from_action(**trivial);
                         }});
  plan.checks.push_back({"trivial_action_multiplicative", "Pass", [=] {
                           if (!*trivial) *trivial = action_connection(still, zero_lift(), n, seed, tol);
                           if (!(*trivial)->connection) {
                             CheckOutcome o;
                             o.verdict = "Fail";
                             o.details = {{"reason", "no connection was produced"}};
                             return o;
                           }
                           const auto r = multiplicativity_check_pointwise(*(*trivial)->connection, n, seed, tol);
                           CheckOutcome o = from_pointwise(r);
                           o.verdict = r.worst() < 1e-9 ? "Pass" : "Fail";
                           o.details.emplace_back("bound", format_real(1e-9));
                           return o;
                         }});
  plan.primary = lazy([rotating, tol] { return action_candidate(rotating, zero_lift(), tol); });
  add_multiplicativity(plan, cfg, seed, "NotMultiplicative");
  return plan;
}

// ---------------------------------------------------------------- punctured_group_bundle

constexpr int kGammaOrder = 2;
constexpr double kHalfTurn = kTwoPi / 2.0;

ScenarioPlan punctured_bundle_plan(const Config& cfg, std::uint64_t seed) {
  ScenarioPlan plan;
  const Tolerances tol = cfg.tol;
  const std::size_t budget = cfg.budget.probe_paths;
  const auto m = cat::group_bundle_projection(cat::real_line(), {cat::GroupKind::Finite, kGammaOrder},
                                              cat::Puncture{vec({0.0}), 1e-3});
  const auto c = std::make_shared<const Connection>(connections::product(m));
  plan.primary = [c] { return *c; };
  const Space base_arrows = m->base->arrows;

  // Non-identity arrows driven straight through the puncture.
  const PathFamily aimed = [base_arrows](std::uint64_t s, std::uint64_t i) {
    const double u = aimed_offset(s, i, 101);
    const int patch = 1 + static_cast<int>(i % (kGammaOrder - 1));
    return ProbeSample{linear_path(base_arrows, Point{0, vec({-u})}, vec({2.0 * u})), Point{patch, vec({-u})}};
  };
  auto fib = std::make_shared<std::optional<FibrationVerdict>>();
  const auto get_fib = [=]() -> const FibrationVerdict& {
    if (!*fib) *fib = fibration_probe(*m, cfg.budget.pointwise_samples, seed, tol, cfg.budget.fiber_samples);
    return **fib;
  };
  // The crosscheck runs the total, kernel and base probes once; the probe
  // checks below read its verdicts.
  auto cross = std::make_shared<std::optional<ConsistencyReport>>();
  const auto get_cross = [=]() -> const ConsistencyReport& {
    if (!*cross) {
      const Connection kc = kernel_connection(*c, tol);
      CrosscheckInput in;
      in.total_paths = interleave(aimed, random_arrow_paths(*c));
      in.kernel_paths = interleave(aimed, random_arrow_paths(kc));
      in.base_paths = random_object_paths(*c);
      in.fibration = get_fib().fibration();
      in.kernel_source_connected = m->kernel->family->total->traits.source_connected;
      *cross = theorem_crosscheck_kernel(*c, in, budget, seed, tol);
    }
    return **cross;
  };

  add_multiplicativity(plan, cfg, seed, "Multiplicative");
  plan.checks.push_back({"total_probe", "IncompleteWitness", [=] { return from_probe(get_cross().total); }});
  plan.checks.push_back({"escape_before_end", "true", [=] {
                           const auto& v = get_cross().total;
                           return boolean(v.escape_time && *v.escape_time < 1.0, probe_details(v));
                         }});
  plan.checks.push_back({"base_probe", "NoCounterexampleFound", [=] { return from_probe(get_cross().base); }});
  plan.checks.push_back({"fibration", "true", [=] {
                           const auto& f = get_fib();
                           CheckOutcome o = boolean(f.fibration(), {{"min_sv_submersion", format_real(f.min_sv_submersion)},
                                                                    {"min_sv_shriek", format_real(f.min_sv_shriek)}});
                           o.samples = f.samples;
                           return o;
                         }});
  plan.checks.push_back({"kernel_crosscheck", "Consistent", [=] { return from_crosscheck(get_cross()); }});
  return plan;
}

// ---------------------------------------------------------------- disjoint_union_cover

ScenarioPlan cover_plan(const Config& cfg, std::uint64_t seed) {
  ScenarioPlan plan;
  const Tolerances tol = cfg.tol;
  const std::size_t budget = cfg.budget.probe_paths;
  const auto m = cat::cover_example(kGammaOrder, 0.0, 1e-3);
  const auto c = std::make_shared<const Connection>(connections::identity(m));
  plan.primary = [c] { return *c; };
  const Space base_arrows = m->base->arrows;

  // Non-identity arrows of the punctured copy, driven through the puncture.
  const PathFamily aimed = [base_arrows](std::uint64_t s, std::uint64_t i) {
    const double u = aimed_offset(s, i, 103);
    const int k = 1 + static_cast<int>(i % (kGammaOrder - 1));
    return ProbeSample{linear_path(base_arrows, Point{k, vec({-u})}, vec({2.0 * u})),
                       Point{kGammaOrder + k, vec({-u})}};
  };
  auto fib = std::make_shared<std::optional<FibrationVerdict>>();
  const auto get_fib = [=]() -> const FibrationVerdict& {
    if (!*fib) *fib = fibration_probe(*m, cfg.budget.pointwise_samples, seed, tol, cfg.budget.fiber_samples);
    return **fib;
  };
  auto cross = std::make_shared<std::optional<ConsistencyReport>>();
  const auto get_cross = [=]() -> const ConsistencyReport& {
    if (!*cross) {
      const Connection kc = kernel_connection(*c, tol);
      CrosscheckInput in;
      in.total_paths = interleave(aimed, random_arrow_paths(*c));
      in.kernel_paths = random_arrow_paths(kc);
      in.base_paths = random_object_paths(*c);
      in.fibration = get_fib().fibration();
      in.kernel_source_connected = m->kernel->family->total->traits.source_connected;
      *cross = theorem_crosscheck_kernel(*c, in, budget, seed, tol);
    }
    return **cross;
  };

  add_multiplicativity(plan, cfg, seed, "Multiplicative");
  plan.checks.push_back({"kernel_probe", "NoCounterexampleFound", [=] { return from_probe(get_cross().kernel); }});
  plan.checks.push_back({"total_probe", "IncompleteWitness", [=] { return from_probe(get_cross().total); }});
  plan.checks.push_back({"star_surjective_heuristic", "false", [=] {
                           const auto& f = get_fib();
                           CheckOutcome o = boolean(f.star_surjective_heuristic,
                                                    {{"fibration", f.fibration() ? "true" : "false"},
                                                     {"worst_uncovered_distance",
                                                      format_real(f.worst_uncovered_distance)}});
                           o.worst_residual = f.worst_uncovered_distance;
                           o.witness = f.uncovered_witness;
                           o.samples = f.samples;
                           return o;
                         }});
  plan.checks.push_back({"kernel_crosscheck", "Consistent", [=] { return from_crosscheck(get_cross()); }});
  return plan;
}

// ---------------------------------------------------------------- morita_pullback

constexpr double kMoritaRate = 0.7;

ScenarioPlan morita_plan(const Config& cfg, std::uint64_t seed) {
  ScenarioPlan plan;
  const Tolerances tol = cfg.tol;
  const std::size_t budget = cfg.budget.probe_paths;
  const auto H = cat::pair(cat::real_line());
  const auto m = cat::pullback_projection(H, 1);
  const auto c = std::make_shared<const Connection>(morita_connection(m, fx::exponential_lift(kMoritaRate), tol));
  plan.primary = [c] { return *c; };

  add_multiplicativity(plan, cfg, seed, "Multiplicative");
  plan.checks.push_back({"closed_form_transport", "Pass", [=] {
                           const Groupoid& G = *m->total;
                           double worst = 0.0;
                           std::optional<Witness> wit;
                           const std::size_t pairs = 50;
                           for (std::size_t i = 0; i < pairs; ++i) {
                             const Point g = G.sample_arrow(seed, i);
                             const BasePath gamma = H->arrow_path(m->arrow_map(g), seed, i);
                             const TransportOutcome o = parallel_transport(*c, gamma, g, 1.0, tol);
                             if (!o.completed()) {
                               worst = kInf;
                               wit = Witness{"transport escaped", flatten(g)};
                               break;
                             }
                             const VectorXd h0 = gamma.at(0.0).coords;
                             const VectorXd h1 = gamma.at(1.0).coords;
                             // f evolves by f' = k f n', separately at both ends of the arrow.
                             const double fx1 = g.coords[0] * std::exp(kMoritaRate * (h1[0] - h0[0]));
                             const double fy1 = g.coords[3] * std::exp(kMoritaRate * (h1[1] - h0[1]));
                             const double r = std::max({std::abs(o.end->coords[0] - fx1),
                                                        std::abs(o.end->coords[3] - fy1),
                                                        (o.end->coords.segment(1, 2) - h1).norm()});
                             if (r > worst || !wit) {
                               worst = std::max(worst, r);
                               wit = Witness{"start arrow of the worst pair", flatten(g)};
                             }
                           }
                           CheckOutcome o = threshold(worst, 1e-6, pairs);
                           o.witness = wit;
                           return o;
                         }});
  plan.checks.push_back({"perturbed_lift", "NotMultiplicative", [=] {
                           Connection skew = *c;
                           const HorLift base = c->hor;
                           skew.hor = [base](const Point& g, const VectorXd& a) -> VectorXd {
                             VectorXd v = base(g, a);
                             v[0] += 1e-3 * a[0];
                             return v;
                           };
                           return from_pointwise(
                               multiplicativity_check_pointwise(skew, cfg.budget.pointwise_samples, seed, tol));
                         }});
  plan.checks.push_back({"completeness_probe", "NoCounterexampleFound", [=] {
                           return from_probe(completeness_probe(*c, random_arrow_paths(*c), budget, seed, tol));
                         }});

  // Punctured at the object (0, 0): a lift whose target starts at f = 0
  // stays at f = 0 and runs into the hole.
  const auto mp = cat::pullback_projection(H, 1, cat::Puncture{vec({0.0, 0.0}), 1e-3});
  const auto cp = std::make_shared<const Connection>(morita_connection(mp, fx::exponential_lift(kMoritaRate), tol));
  const Space base_arrows = H->arrows;
  const Space base_objects = H->objects;
  const PathFamily aimed_arrows = [base_arrows](std::uint64_t s, std::uint64_t i) {
    Rng rng = make_rng(s, i, 107);
    const double u = 0.5 + uniform(rng, 0.0, 0.5);
    const double src = uniform(rng, -2.0, 2.0);
    const double fy = uniform(rng, 0.5, 2.0);
    const double v = uniform(rng, -1.0, 1.0);
    return ProbeSample{linear_path(base_arrows, Point{0, vec({-u, src})}, vec({2.0 * u, v})),
                       Point{0, vec({0.0, -u, src, fy})}};
  };
  const PathFamily aimed_objects = [base_objects](std::uint64_t s, std::uint64_t i) {
    const double u = aimed_offset(s, i, 109);
    return ProbeSample{linear_path(base_objects, Point{0, vec({-u})}, vec({2.0 * u})), Point{0, vec({-u, 0.0})}};
  };
  plan.checks.push_back({"punctured_total_probe", "IncompleteWitness", [=] {
                           return from_probe(completeness_probe(*cp, interleave(aimed_arrows, random_arrow_paths(*cp)),
                                                                budget, seed, tol));
                         }});
  plan.checks.push_back({"punctured_base_probe", "IncompleteWitness", [=] {
                           return from_probe(base_completeness_probe(
                               *cp, interleave(aimed_objects, random_object_paths(*cp)), budget, seed, tol));
                         }});
  return plan;
}

// ---------------------------------------------------------------- pair_fibration_kernel_thm

ScenarioPlan pair_kernel_plan(const Config& cfg, std::uint64_t seed) {
  ScenarioPlan plan;
  const Tolerances tol = cfg.tol;
  const std::size_t budget = cfg.budget.probe_paths;
  const Space N = cat::circle("N");
  const Space F = cat::real_line("F");
  const auto m = cat::pair_projection(N, F);
  const auto c = std::make_shared<const Connection>(connections::pair_product(m));
  plan.primary = [c] { return *c; };
  auto fibration = std::make_shared<std::optional<bool>>();

  const auto crosscheck = [=](const Connection& conn, PathFamily total, PathFamily kernel, PathFamily base) {
    CrosscheckInput in;
    in.total_paths = std::move(total);
    in.kernel_paths = std::move(kernel);
    in.base_paths = std::move(base);
    if (!*fibration) {
      *fibration = fibration_probe(*conn.morphism, cfg.budget.pointwise_samples, seed, tol, cfg.budget.fiber_samples)
                       .fibration();
    }
    in.fibration = **fibration;
    in.kernel_source_connected = conn.morphism->kernel->family->total->traits.source_connected;
    return from_crosscheck(theorem_crosscheck_kernel(conn, in, budget, seed, tol));
  };

  add_multiplicativity(plan, cfg, seed, "Multiplicative");
  plan.checks.push_back({"fibration", "true", [=] {
                           const auto f = fibration_probe(*m, cfg.budget.pointwise_samples, seed, tol,
                                                          cfg.budget.fiber_samples);
                           *fibration = f.fibration();
                           return boolean(f.fibration(), {{"uniform", f.uniform_ok ? "true" : "false"}});
                         }});
  plan.checks.push_back({"complete_crosscheck", "Consistent", [=] {
                           const Connection kc = kernel_connection(*c, tol);
                           CheckOutcome o = crosscheck(*c, random_arrow_paths(*c), random_arrow_paths(kc),
                                                       random_object_paths(*c));
                           return o;
                         }});

  // Puncture at (pi, 0) in N x F: lifts starting at f = 0 keep f = 0 and hit it.
  const auto mp = cat::pair_projection(N, F, cat::Puncture{vec({kHalfTurn, 0.0}), 1e-3});
  const auto cp = std::make_shared<const Connection>(connections::pair_product(mp));
  const Space base_arrows = mp->base->arrows;
  const Space base_objects = mp->base->objects;
  const PathFamily aimed_total = [base_arrows](std::uint64_t s, std::uint64_t i) {
    Rng rng = make_rng(s, i, 113);
    const double u = 0.5 + uniform(rng, 0.0, 0.5);
    const double src = uniform(rng, 0.0, kTwoPi);
    const double fs = uniform(rng, 0.5, 2.0);
    const double v = uniform(rng, -1.0, 1.0);
    return ProbeSample{linear_path(base_arrows, Point{0, vec({kHalfTurn - u, src})}, vec({2.0 * u, v})),
                       Point{0, vec({kHalfTurn - u, 0.0, src, fs})}};
  };
  const PathFamily aimed_kernel = [base_objects](std::uint64_t s, std::uint64_t i) {
    Rng rng = make_rng(s, i, 127);
    const double u = 0.5 + uniform(rng, 0.0, 0.5);
    const double fs = uniform(rng, 0.5, 2.0);
    return ProbeSample{linear_path(base_objects, Point{0, vec({kHalfTurn - u})}, vec({2.0 * u})),
                       Point{0, vec({kHalfTurn - u, 0.0, fs})}};
  };
  const PathFamily aimed_base = [base_objects](std::uint64_t s, std::uint64_t i) {
    const double u = aimed_offset(s, i, 131);
    return ProbeSample{linear_path(base_objects, Point{0, vec({kHalfTurn - u})}, vec({2.0 * u})),
                       Point{0, vec({kHalfTurn - u, 0.0})}};
  };
  plan.checks.push_back({"punctured_crosscheck", "Consistent", [=] {
                           const Connection kc = kernel_connection(*cp, tol);
                           return crosscheck(*cp, interleave(aimed_total, random_arrow_paths(*cp)),
                                             interleave(aimed_kernel, random_arrow_paths(kc)),
                                             interleave(aimed_base, random_object_paths(*cp)));
                         }});
  return plan;
}

// ---------------------------------------------------------------- proper_average

constexpr int kPrimaryNodes = 4;

ScenarioPlan proper_average_plan(const Config& cfg, std::uint64_t seed) {
  ScenarioPlan plan;
  const Tolerances tol = cfg.tol;
  const std::size_t n = cfg.budget.pointwise_samples;
  const auto fam = fx::rotation_family();
  const GroupoidPtr G = fam->total;
  const BaseLift hor0 = fx::flat_lift(1, 3);
  const BaseLift hs = fx::skewed_source_lift();
  const ArrowField X = [G, hor0, hs](const Point& g) { return hs(g, hor0(G->src(g), vec({1.0}))); };
  const ObjectField XM = [](const Point&) { return vec({1.0, 0.0, 0.0}); };
  const int coarse_nodes = tol.quad_nodes;
  const int fine_nodes = tol.quad_nodes * tol.quad_refine;
  auto coarse = std::make_shared<std::optional<AveragedField>>();
  const auto get_coarse = [=] {
    if (!*coarse) *coarse = haar_average(G, X, coarse_nodes, n, seed, tol);
    return **coarse;
  };

  plan.checks.push_back({"input_field", "NotMultiplicative", [=] {
                           const Report r = multiplicative_field_check(*G, X, XM, n, seed, tol);
                           CheckOutcome o = pass_fail(r);
                           o.verdict = to_string(classify(r.worst_residual, tol.tol_mult));
                           return o;
                         }});
  plan.checks.push_back({"averaged_field", "Multiplicative", [=] {
                           const Report r = get_coarse().report;
                           CheckOutcome o = pass_fail(r);
                           o.verdict = to_string(classify(r.worst_residual, tol.tol_mult));
                           o.details.emplace_back("nodes", std::to_string(coarse_nodes));
                           return o;
                         }});
  plan.checks.push_back({"quadrature_convergence", "Pass", [=] {
                           const auto fine = haar_average(G, X, fine_nodes, 0, seed, tol);
                           const double d = field_distance(*G, get_coarse().arrows, fine.arrows, 50, seed);
                           return threshold(d, 1e-8, 50,
                                            {{"coarse_nodes", std::to_string(coarse_nodes)},
                                             {"fine_nodes", std::to_string(fine_nodes)}});
                         }});
  plan.checks.push_back({"fixed_point", "Pass", [=] {
                           // (n, θ, p) -> (1, 0, p) commutes with the rotations.
                           const ArrowField Y = [](const Point& g) {
                             return vec({1.0, 0.0, g.coords[2], g.coords[3]});
                           };
                           const auto avg = haar_average(G, Y, coarse_nodes, 0, seed, tol);
                           return threshold(field_distance(*G, avg.arrows, Y, n, seed), 1e-9, n);
                         }});
  // Transport evaluates the averaged lift thousands of times per path, so
  // the criterion checks run on a small rule that this check shows agrees
  // with the full one: the integrand is a trigonometric polynomial of low
  // degree in the node angle.
  plan.checks.push_back({"primary_quadrature", "Pass", [=] {
                           const Connection full = proper_family_connection(fam, hor0, hs, coarse_nodes, tol);
                           const Connection small = proper_family_connection(fam, hor0, hs, kPrimaryNodes, tol);
                           const ArrowField a = [&](const Point& g) { return full.hor(g, vec({1.0})); };
                           const ArrowField b = [&](const Point& g) { return small.hor(g, vec({1.0})); };
                           return threshold(field_distance(*G, a, b, 50, seed), 1e-12, 50,
                                            {{"nodes", std::to_string(kPrimaryNodes)},
                                             {"reference_nodes", std::to_string(coarse_nodes)}});
                         }});
  plan.primary = lazy([=] { return proper_family_connection(fam, hor0, hs, kPrimaryNodes, tol); });
  add_multiplicativity(plan, cfg, seed, "Multiplicative");
  return plan;
}

// ---------------------------------------------------------------- sproper_complete_family

constexpr std::size_t kScheduleDepth = 4;

ScenarioPlan sproper_plan(const Config& cfg, std::uint64_t seed) {
  ScenarioPlan plan;
  const Tolerances tol = cfg.tol;
  const std::size_t n = cfg.budget.pointwise_samples;
  const auto F = fx::bundle_fiber(kGammaOrder);
  const auto fam = fx::bundle_family(F);
  const auto atlas = std::make_shared<const TrivializingAtlas>(fx::two_window_atlas(fam, F, tol));
  const auto f = std::make_shared<const Exhaustion>(invariant_exhaustion(F, n, seed, tol));
  const auto schedule = std::make_shared<const LevelSchedule>(level_schedule(*atlas, *f, kScheduleDepth, tol));
  auto built = std::make_shared<std::optional<BuiltConnection>>();
  const auto get_built = [=]() -> const BuiltConnection& {
    if (!*built) *built = complete_connection_builder(*atlas, *f, *schedule, n, seed, tol);
    return **built;
  };

  plan.checks.push_back({"atlas_check", "Pass", [=] { return pass_fail(atlas_check(*atlas, n, seed, tol)); }});
  plan.checks.push_back({"level_schedule_disjoint", "true", [=] {
                           Details d;
                           for (std::size_t a = 0; a < schedule->levels.size(); ++a) {
                             std::string row;
                             for (int l : schedule->levels[a]) row += (row.empty() ? "" : " ") + std::to_string(l);
                             d.emplace_back("window" + std::to_string(a), row);
                           }
                           return boolean(schedule->disjoint(), d);
                         }});
  plan.checks.push_back({"certificate", "CertifiedComplete", [=] {
                           const auto& cert = get_built().certificate;
                           CheckOutcome o;
                           o.verdict = to_string(cert.verdict);
                           for (const auto& w : cert.windows) {
                             o.worst_residual = std::max(o.worst_residual, w.flatness.worst_residual);
                             o.samples += w.flatness.samples;
                             o.details.emplace_back("window" + std::to_string(w.window) + "_flatness",
                                                    format_real(w.flatness.worst_residual));
                             double radius = 0.0;
                             for (const auto& r : w.component_radii) radius = std::max(radius, r.hi);
                             o.details.emplace_back("window" + std::to_string(w.window) + "_radius_bound",
                                                    format_real(radius));
                           }
                           if (!cert.failed_clause.empty()) o.details.emplace_back("failed_clause", cert.failed_clause);
                           return o;
                         }});
  plan.checks.push_back({"box_probe", "NoCounterexampleFound", [=] {
                           const Connection& conn = get_built().connection;
                           return from_probe(completeness_probe(conn, fx::box_paths(conn, atlas->box),
                                                                cfg.budget.probe_paths, seed, tol));
                         }});
  plan.checks.push_back({"injected_overlap", "CertificateFailure", [=] {
                           LevelSchedule bad = *schedule;
                           bad.levels[1][1] = bad.levels[0][1];
                           verify_disjointness(bad, *atlas, *f);
                           CheckOutcome o;
                           o.details = {{"overlaps", std::to_string(bad.overlaps.size())}};
                           try {
                             complete_connection_builder(*atlas, *f, bad, n, seed, tol);
                             o.verdict = "Built";
                           } catch (const Error& e) {
                             if (e.code() != ErrorCode::CertificateFailure) throw;
                             o.verdict = "CertificateFailure";
                             o.details.emplace_back("message", e.what());
                           }
                           return o;
                         }});
  plan.primary = [get_built] { return get_built().connection; };
  add_multiplicativity(plan, cfg, seed, "Multiplicative");
  return plan;
}

// ---------------------------------------------------------------- product_not_uniform

ScenarioPlan product_plan(const Config& cfg, std::uint64_t seed) {
  ScenarioPlan plan;
  const Tolerances tol = cfg.tol;
  const auto m = cat::product_projection(cat::pair(cat::real_line("N")), cat::real_line("P"));
  const auto c = std::make_shared<const Connection>(connections::product(m));
  plan.primary = [c] { return *c; };
  auto probe = std::make_shared<std::optional<FibrationVerdict>>();
  const auto get = [=]() -> const FibrationVerdict& {
    if (!*probe) *probe = fibration_probe(*m, cfg.budget.pointwise_samples, seed, tol, cfg.budget.fiber_samples);
    return **probe;
  };

  plan.checks.push_back({"fibration", "true", [=] {
                           const auto& f = get();
                           CheckOutcome o = boolean(f.fibration(), {{"min_sv_submersion", format_real(f.min_sv_submersion)},
                                                                    {"min_sv_shriek", format_real(f.min_sv_shriek)}});
                           o.samples = f.samples;
                           return o;
                         }});
  plan.checks.push_back({"uniform", "false", [=] {
                           const auto& f = get();
                           CheckOutcome o = boolean(f.uniform_ok, {{"min_sv_uniform", format_real(f.min_sv_uniform)}});
                           o.worst_residual = f.min_sv_uniform;
                           o.samples = f.samples;
                           return o;
                         }});
  add_multiplicativity(plan, cfg, seed, "Multiplicative");
  return plan;
}

// ---------------------------------------------------------------- splitting_fixture

ScenarioPlan splitting_plan(const Config& cfg, std::uint64_t seed) {
  ScenarioPlan plan;
  const Tolerances tol = cfg.tol;
  plan.checks.push_back({"splitting_identities", "Pass", [=] {
                           const std::size_t fixtures = 50;
                           double worst = 0.0;
                           std::string where;
                           for (std::size_t i = 0; i < fixtures; ++i) {
                             const VbFiberData d = random_splitting_fixture(seed, i);
                             const SplittingResult right = splitting_correspondence(d, SplittingDatum::RightSplitting);
                             VbFiberData left{d.iota, d.proj, std::nullopt, right.data.p, std::nullopt};
                             VbFiberData comp{d.iota, d.proj, std::nullopt, std::nullopt, right.data.C};
                             const SplittingResult l = splitting_correspondence(left, SplittingDatum::LeftSplitting);
                             const SplittingResult k = splitting_correspondence(comp, SplittingDatum::Complement);
                             for (const auto* r : {&right, &l, &k}) {
                               if (r->worst() > worst || where.empty()) {
                                 worst = std::max(worst, r->worst());
                                 where = "fixture " + std::to_string(i);
                               }
                             }
                           }
                           return threshold(worst, 1e-12, fixtures, {{"worst_at", where}});
                         }});

  // A family connection on R x Pair(R) -> R read off from the complement
  // C = span(1, 1/2, 1/2) of ker Tπ at every arrow.
  plan.primary = lazy([tol] {
    const auto m = cat::family_projection(cat::real_line("N"), cat::pair(cat::real_line("F")));
    VbFiberData d;
    d.iota = MatrixXd::Zero(3, 2);
    d.iota(1, 0) = 1.0;
    d.iota(2, 1) = 1.0;
    d.proj = MatrixXd::Zero(1, 3);
    d.proj(0, 0) = 1.0;
    d.C = vec({1.0, 0.5, 0.5});
    const MatrixXd h = *splitting_correspondence(d, SplittingDatum::Complement).data.h;
    const Point probe = m->total->sample_arrow(0, 0);
    const MatrixXd h0 = jacobian(m->total->src, probe, tol) * h;
    Connection c;
    c.morphism = m;
    c.provenance = "splitting";
    c.claimed_multiplicative = true;
    c.hor = [h](const Point&, const VectorXd& a) -> VectorXd { return h * a; };
    c.hor0 = [h0](const Point&, const VectorXd& w) -> VectorXd { return h0 * w; };
    return c;
  });
  add_multiplicativity(plan, cfg, seed, "Multiplicative");
  return plan;
}

}  // namespace

const std::vector<ScenarioInfo>& scenario_registry() {
  static const std::vector<ScenarioInfo> registry = {
      {"luca_r2_s1", "Exponential map R^2 -> S^1 with lift b = x^2 a: a complement that is not multiplicative",
       "Vector group R^2 onto the circle group; the product clause fails at g = h = (1, 0)", luca_plan},
      {"so2_action_no_mec", "Rotation action of SO(2) on R^2 admits no multiplicative connection",
       "Action groupoids: a multiplicative connection with Hor0 = 0 exists only for the trivial action", so2_plan},
      {"punctured_group_bundle", "Punctured Z2 bundle over R: multiplicative, incomplete, with complete base",
       "Completeness over source-connected bases fails without source-connected fibres", punctured_bundle_plan},
      {"disjoint_union_cover", "Complete kernel does not force a complete total connection",
       "Disjoint union of a group bundle and its punctured copy over the bundle", cover_plan},
      {"morita_pullback", "Pullback of Pair(R) along N x R -> N: the induced connection, its uniqueness and completeness",
       "Morita fibrations carry a unique multiplicative connection, complete when Hor0 is", morita_plan},
      {"pair_fibration_kernel_thm", "Pair(S^1 x R) -> Pair(S^1): kernel completeness against total completeness",
       "For fibrations, completeness of total, kernel and base connections are linked", pair_kernel_plan},
      {"proper_average", "Haar averaging of a skewed lift on SO(2) x| R^2 over R",
       "Proper families admit multiplicative connections by averaging", proper_average_plan},
      {"sproper_complete_family", "Glued complete connection on a source-proper R x Z2 family with level sets",
       "Source-proper families admit complete multiplicative connections", sproper_plan},
      {"product_not_uniform", "Pair(R) x R -> Pair(R) is a fibration that is not uniform",
       "Fibrations need not be uniform", product_plan},
      {"splitting_fixture", "Right splittings, left splittings and complements of short exact sequences",
       "Splittings of a short exact sequence of vector spaces correspond to each other", splitting_plan},
  };
  return registry;
}

const ScenarioInfo& find_scenario(const std::string& name) {
  const auto& reg = scenario_registry();
  const auto it = std::find_if(reg.begin(), reg.end(), [&](const ScenarioInfo& s) { return s.name == name; });
  if (it == reg.end()) throw Error(ErrorCode::UnknownScenario, "no scenario named '" + name + "'");
  return *it;
}

}  // namespace mec
