#include <algorithm>
#include <cmath>

#include "mec/catalog.hpp"
#include "mec/constructions.hpp"
#include "mec/error.hpp"
#include "mec/random.hpp"

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

SmoothMap shift_map(const Space& S, const FiberShift& shift, double sign) {
  return make_map(
      S, S,
      [shift, sign](const Point& p) {
        Point q = p;
        const double c = shift.c(p.coords[0]);
        q.coords.tail(q.coords.size() - 1).array() += sign * c;
        return q;
      },
      [shift, sign](const Point& p) -> MatrixXd {
        const auto d = p.coords.size();
        MatrixXd j = MatrixXd::Identity(d, d);
        j.col(0).tail(d - 1).setConstant(sign * shift.dc(p.coords[0]));
        return j;
      });
}

bool closures_meet(const Interval& a, const Interval& b) { return a.intersects(b); }

}  // namespace

FiberShift constant_shift(double value) {
  return {[value](double) { return value; }, [](double) { return 0.0; },
          [value](const Interval&) { return Interval(value); }};
}

FiberShift sine_shift(double amplitude) {
  return {[amplitude](double n) { return amplitude * std::sin(n); },
          [amplitude](double n) { return amplitude * std::cos(n); },
          [amplitude](const Interval& n) { return Interval(amplitude) * sin(n); }};
}

FiberShift affine_shift(double slope, double offset) {
  return {[=](double n) { return slope * n + offset; }, [slope](double) { return slope; },
          [=](const Interval& n) { return Interval(slope) * n + Interval(offset); }};
}

TrivializingAtlas make_atlas(const MorphismPtr& family, const GroupoidPtr& fiber, std::vector<WindowSpec> windows,
                             Interval box, const Tolerances& tol) {
  if (!family->is_family() || family->base->objects.size() != 1 || family->base->objects.dim(0) != 1) {
    throw Error(ErrorCode::AtlasMismatch, "atlases need a family over a one-dimensional base");
  }
  TrivializingAtlas atlas;
  atlas.family = family;
  atlas.fiber = fiber;
  atlas.box = box;
  for (auto& w : windows) {
    if (w.U.lo - w.V.lo < tol.atlas_margin || w.V.hi - w.U.hi < tol.atlas_margin) {
      throw Error(ErrorCode::AtlasMismatch, "closure(U) is not inside V with the required margin");
    }
    const Space& A = family->total->arrows;
    const Space& O = family->total->objects;
    atlas.windows.push_back({w.U, w.V, w.shift, shift_map(A, w.shift, -1.0), shift_map(A, w.shift, 1.0),
                             shift_map(O, w.shift, -1.0), shift_map(O, w.shift, 1.0)});
  }
  return atlas;
}

Report atlas_check(const TrivializingAtlas& atlas, std::size_t n_samples, std::uint64_t seed, const Tolerances& tol) {
  const Groupoid& G = *atlas.family->total;
  const SmoothMap& pi = atlas.family->arrow_map;
  Report rep;
  rep.check = "atlas";
  rep.seed = seed;
  for (const auto& w : atlas.windows) {
    for (std::size_t i = 0; i < n_samples; ++i) {
      const Point g = G.sample_arrow(seed, i);
      const auto [a, b] = G.sample_pair(seed, i);
      const Point pg = w.psi_arrows(g);
      rep.absorb(std::abs(pg.coords[0] - pi(g).coords[0]), at_points("pr1 psi = pi", {g}));
      rep.absorb(G.arrows.distance(w.psi_inv_arrows(pg), g), at_points("psi^-1 psi = id", {g}));
      rep.absorb(G.objects.distance(G.src(pg), w.psi_objects(G.src(g))), at_points("s psi = psi s", {g}));
      rep.absorb(G.objects.distance(G.tgt(pg), w.psi_objects(G.tgt(g))), at_points("t psi = psi t", {g}));
      rep.absorb(G.arrows.distance(w.psi_arrows(G.multiply(a, b)), G.multiply(w.psi_arrows(a), w.psi_arrows(b))),
                 at_points("psi m = m (psi x psi)", {a, b}));
    }
  }
  rep.samples = n_samples * atlas.windows.size();
  rep.finalize(tol.tol_alg);
  return rep;
}

VectorXd window_lift(const AtlasWindow& w, const Point& g, const VectorXd& v, const Tolerances& tol) {
  VectorXd e = VectorXd::Zero(g.coords.size());
  e[0] = v[0];
  return jacobian(w.psi_inv_arrows, w.psi_arrows(g), tol) * e;
}

VectorXd window_base_lift(const AtlasWindow& w, const Point& x, const VectorXd& v, const Tolerances& tol) {
  VectorXd e = VectorXd::Zero(x.coords.size());
  e[0] = v[0];
  return jacobian(w.psi_inv_objects, w.psi_objects(x), tol) * e;
}

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double window_bump(const Interval& U, const Interval& V, double n) {
  if (n < U.lo) return smooth_step((n - V.lo) / (U.lo - V.lo));
  if (n > U.hi) return smooth_step((V.hi - n) / (V.hi - U.hi));
  return 1.0;
}

std::vector<BaseFunction> standard_partition(const TrivializingAtlas& atlas) {
  std::vector<std::pair<Interval, Interval>> w;
  for (const auto& win : atlas.windows) w.emplace_back(win.U, win.V);
  std::vector<BaseFunction> chi;
  for (std::size_t a = 0; a < w.size(); ++a) {
    chi.push_back([w, a](double n) {
      double total = 0.0;
      for (const auto& [U, V] : w) total += window_bump(U, V, n);
      if (total == 0.0) return 1.0 / static_cast<double>(w.size());
      return window_bump(w[a].first, w[a].second, n) / total;
    });
  }
  return chi;
}

namespace {

using ChartWeights = std::function<std::vector<double>(const Point& object)>;

Connection weighted_connection(const TrivializingAtlas& atlas, ChartWeights weights, const Tolerances& tol,
                               std::string provenance) {
  const GroupoidPtr G = atlas.family->total;
  const std::vector<AtlasWindow> windows = atlas.windows;
  Connection c;
  c.morphism = atlas.family;
  c.provenance = std::move(provenance);
  c.claimed_multiplicative = true;
  c.hor = [G, windows, weights, tol](const Point& g, const VectorXd& w) -> VectorXd {
    const std::vector<double> chi = weights(G->src(g));
    VectorXd v = VectorXd::Zero(g.coords.size());
    for (std::size_t a = 0; a < windows.size(); ++a) {
      if (chi[a] != 0.0) v += chi[a] * window_lift(windows[a], g, w, tol);
    }
    return v;
  };
  c.hor0 = [windows, weights, tol](const Point& x, const VectorXd& w) -> VectorXd {
    const std::vector<double> chi = weights(x);
    VectorXd v = VectorXd::Zero(x.coords.size());
    for (std::size_t a = 0; a < windows.size(); ++a) {
      if (chi[a] != 0.0) v += chi[a] * window_base_lift(windows[a], x, w, tol);
    }
    return v;
  };
  return c;
}

}  // namespace

Connection glue_local_trivial(const TrivializingAtlas& atlas, const std::vector<BaseFunction>& partition,
                              const Tolerances& tol) {
  if (partition.size() != atlas.windows.size()) {
    throw Error(ErrorCode::AtlasMismatch, "one partition function per window is required");
  }
  constexpr int kGrid = 2001;
  for (int i = 0; i < kGrid; ++i) {
    const double n = atlas.box.lo + (atlas.box.hi - atlas.box.lo) * i / (kGrid - 1);
    double total = 0.0;
    for (const auto& chi : partition) total += chi(n);
    if (std::abs(total - 1.0) > tol.partition_tol) {
      throw Error(ErrorCode::PartitionGap, "partition sums to " + format_real(total) + " at n = " + format_real(n));
    }
  }
  ChartWeights weights = [partition](const Point& x) {
    std::vector<double> chi;
    for (const auto& f : partition) chi.push_back(f(x.coords[0]));
    return chi;
  };
  return weighted_connection(atlas, weights, tol, "glued");
}

Exhaustion invariant_exhaustion(const GroupoidPtr& fiber, std::size_t n_samples, std::uint64_t seed,
                                const Tolerances& tol) {
  const Groupoid& F = *fiber;
  if (!F.traits.source_proper) throw Error(ErrorCode::NotSourceProper, F.name + " is not declared source-proper");
  if (F.objects.size() != 1) throw Error(ErrorCode::InvalidParams, "exhaustions need a single-patch object space");
  const Patch patch = F.objects.patch(0);
  std::vector<int> lines;
  for (int i = 0; i < patch.dim(); ++i) {
    if (patch.kind(i) == CoordKind::Line) lines.push_back(i);
  }
  Exhaustion ex;
  ex.constant = lines.empty();
  ex.f = make_map(
      F.objects, Space::euclidean(1),
      [lines](const Point& x) {
        double r2 = 1.0;
        for (int i : lines) r2 += x.coords[i] * x.coords[i];
        return Point{0, VectorXd::Constant(1, std::sqrt(r2))};
      },
      [lines](const Point& x) -> MatrixXd {
        double r2 = 1.0;
        for (int i : lines) r2 += x.coords[i] * x.coords[i];
        MatrixXd j = MatrixXd::Zero(1, x.coords.size());
        for (int i : lines) j(0, i) = x.coords[i] / std::sqrt(r2);
        return j;
      });
  ex.enclose = [lines](const IntervalBox& box) {
    Interval r2(1.0);
    for (int i : lines) r2 = r2 + sqr(box[static_cast<std::size_t>(i)]);
    return sqrt(r2);
  };
  ex.level_radius = [](const Interval& m) { return sqrt(sqr(m) - Interval(1.0)); };

  Report& rep = ex.report;
  rep.check = "exhaustion_invariance";
  rep.seed = seed;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Point g = F.sample_arrow(seed, i);
    rep.absorb(std::abs(ex.f(F.src(g)).coords[0] - ex.f(F.tgt(g)).coords[0]), at_points("f s = f t", {g}));
    if (lines.empty()) continue;
    // Growth along a ray from a sampled object.
    Rng r = make_rng(seed, i, 51);
    VectorXd dir = VectorXd::Zero(patch.dim());
    for (int l : lines) dir[l] = standard_normal(r);
    dir /= std::max(dir.norm(), 1e-12);
    double prev = -kInf;
    for (int step = 1; step <= 8; ++step) {
      const double v = ex.f(Point{0, patch.normalize(std::pow(2.0, step) * dir)}).coords[0];
      if (!(v > prev)) rep.absorb(kInf, Witness{"f grows along rays", to_std(dir)});
      prev = v;
    }
  }
  rep.samples = n_samples;
  rep.finalize(tol.tol_alg);
  return ex;
}

namespace {

// Enclosure of f in the chart of window `to` over the slab {|f - m| <= 2ε}
// of window `from`, restricted to base points in `region`.
Interval slab_enclosure(const TrivializingAtlas& atlas, const Exhaustion& f, std::size_t from, std::size_t to,
                        int level, double eps, const Interval& region) {
  const int k = atlas.family->total->objects.dim(0) - 1;
  const double R = f.level_radius(Interval(level + 2.0 * eps)).hi;
  const Interval offset = atlas.windows[from].shift.enclose(region) - atlas.windows[to].shift.enclose(region);
  IntervalBox box(static_cast<std::size_t>(k), Interval(-R, R) + offset);
  return f.enclose(box);
}

}  // namespace

LevelSchedule level_schedule(const TrivializingAtlas& atlas, const Exhaustion& f, std::size_t depth,
                             const Tolerances&, double epsilon) {
  LevelSchedule s;
  s.epsilon = epsilon;
  const std::size_t W = atlas.windows.size();
  s.levels.assign(W, {});
  if (f.constant) return s;
  s.depth = depth;
  for (std::size_t i = 0; i < depth; ++i) {
    for (std::size_t a = 0; a < W; ++a) {
      const Interval Va = atlas.windows[a].V;
      int n = i == 0 ? 2 : s.levels[a][i - 1] + 1;
      double sup = -kInf;
      for (std::size_t b = 0; b < W; ++b) {
        if (b == a || !closures_meet(Va, atlas.windows[b].V)) continue;
        const Interval region = meet(Va, atlas.windows[b].V);
        for (std::size_t j = 0; j < s.levels[b].size(); ++j) {
          const Interval e = slab_enclosure(atlas, f, b, a, s.levels[b][j], epsilon, region);
          if (!std::isfinite(e.hi)) throw Error(ErrorCode::SupremumUnbounded, "slab supremum is not finite");
          sup = std::max(sup, e.hi);
        }
      }
      if (std::isfinite(sup)) n = std::max(n, static_cast<int>(std::floor(sup + 2.0 * epsilon)) + 1);
      s.suprema.push_back(std::isfinite(sup) ? Interval(sup) : Interval(0.0));
      s.levels[a].push_back(n);
    }
  }
  verify_disjointness(s, atlas, f);
  return s;
}

void verify_disjointness(LevelSchedule& s, const TrivializingAtlas& atlas, const Exhaustion& f) {
  s.overlaps.clear();
  const double eps = s.epsilon;
  const std::size_t W = s.levels.size();
  for (std::size_t a = 0; a < W; ++a) {
    for (std::size_t i = 0; i < s.levels[a].size(); ++i) {
      for (std::size_t j = i + 1; j < s.levels[a].size(); ++j) {
        if (std::abs(s.levels[a][i] - s.levels[a][j]) <= 4.0 * eps) s.overlaps.push_back({a, i, a, j});
      }
      for (std::size_t b = a + 1; b < W; ++b) {
        if (!closures_meet(atlas.windows[a].V, atlas.windows[b].V)) continue;
        const Interval region = meet(atlas.windows[a].V, atlas.windows[b].V);
        for (std::size_t j = 0; j < s.levels[b].size(); ++j) {
          const int na = s.levels[a][i];
          const int nb = s.levels[b][j];
          const bool below_a = slab_enclosure(atlas, f, b, a, nb, eps, region).hi < na - 2.0 * eps;
          const bool below_b = slab_enclosure(atlas, f, a, b, na, eps, region).hi < nb - 2.0 * eps;
          if (!below_a && !below_b) s.overlaps.push_back({a, i, b, j});
        }
      }
    }
  }
}

LevelSets schedule_levels(const LevelSchedule& schedule) {
  LevelSets out;
  for (const auto& lv : schedule.levels) out.emplace_back(lv.begin(), lv.end());
  return out;
}

const char* to_string(CertificateVerdict v) {
  return v == CertificateVerdict::CertifiedComplete ? "CertifiedComplete" : "NotCertified";
}

CompletenessCertificate flatness_certificate_check(const Connection& c, const TrivializingAtlas& atlas,
                                                   const Exhaustion& f, const LevelSets& levels,
                                                   std::size_t n_samples, std::uint64_t seed, const Tolerances& tol) {
  if (c.morphism != atlas.family) throw Error(ErrorCode::AtlasMismatch, "connection and atlas use different families");
  if (levels.size() != atlas.windows.size()) throw Error(ErrorCode::AtlasMismatch, "one level list per window");
  const Groupoid& G = *atlas.family->total;
  const int k = G.objects.dim(0) - 1;
  CompletenessCertificate cert;
  cert.verdict = CertificateVerdict::CertifiedComplete;
  const VectorXd e = VectorXd::Ones(1);
  for (std::size_t a = 0; a < atlas.windows.size(); ++a) {
    const AtlasWindow& w = atlas.windows[a];
    WindowCertificate wc;
    wc.window = a;
    wc.flatness.check = "flatness_window_" + std::to_string(a);
    wc.flatness.seed = seed;
    const auto& lv = levels[a];
    for (std::size_t i = 0; i < n_samples && !lv.empty(); ++i) {
      Rng r = make_rng(seed, i, 61 + a);
      const double m = lv[static_cast<std::size_t>(uniform_int(r, 0, static_cast<int>(lv.size()) - 1))];
      VectorXd chart(k + 1);
      chart[0] = uniform(r, w.U.lo, w.U.hi);
      VectorXd dir = normal_vector(r, k);
      dir /= std::max(dir.norm(), 1e-12);
      chart.tail(k) = std::sqrt(std::max(m * m - 1.0, 0.0)) * dir;
      const Point x = w.psi_inv_objects(Point{0, chart});
      if (!G.admits_object(x)) continue;
      VectorXd want = VectorXd::Zero(k + 1);
      want[0] = 1.0;
      const VectorXd ox = jacobian(w.psi_objects, x, tol) * c.hor0(x, e);
      wc.flatness.absorb((ox - want).cwiseAbs().maxCoeff(), at_points("Dpsi hor0 = (w, 0) on U x S", {x}));
      const Point g = G.sample_sfiber(x, seed, i);
      VectorXd want_g = VectorXd::Zero(g.coords.size());
      want_g[0] = 1.0;
      const VectorXd og = jacobian(w.psi_arrows, g, tol) * c.hor(g, e);
      wc.flatness.absorb((og - want_g).cwiseAbs().maxCoeff(), at_points("Dpsi hor = (w, 0) on U x s^-1(S)", {g}));
      ++wc.flatness.samples;
    }
    wc.flatness.finalize(tol.flat_tol);

    std::vector<double> sorted = lv;
    std::sort(sorted.begin(), sorted.end());
    wc.bounded = f.constant || !sorted.empty();
    for (double m : sorted) {
      const Interval radius = f.level_radius(Interval(m));
      wc.component_radii.push_back(radius);
      if (!std::isfinite(radius.hi)) wc.bounded = false;
    }
    if (cert.failed_clause.empty()) {
      if (!wc.flatness.pass) {
        cert.failed_clause = "clause (1) on window " + std::to_string(a);
      } else if (!wc.bounded) {
        cert.failed_clause = "clause (2) on window " + std::to_string(a);
      }
    }
    cert.windows.push_back(std::move(wc));
  }
  if (!cert.failed_clause.empty()) cert.verdict = CertificateVerdict::NotCertified;
  return cert;
}

BuiltConnection complete_connection_builder(const TrivializingAtlas& atlas, const Exhaustion& f,
                                            const LevelSchedule& schedule, std::size_t n_samples,
                                            std::uint64_t seed, const Tolerances& tol) {
  if (!schedule.disjoint()) {
    const SlabOverlap& o = schedule.overlaps.front();
    throw Error(ErrorCode::CertificateFailure,
                "clause (1) window exclusivity: slab (" + std::to_string(o.level_a) + ", " + std::to_string(o.window_a) +
                    ") meets slab (" + std::to_string(o.level_b) + ", " + std::to_string(o.window_b) + ")");
  }
  const std::vector<AtlasWindow> windows = atlas.windows;
  const auto levels = schedule.levels;
  const double eps = schedule.epsilon;
  const int k = atlas.family->total->objects.dim(0) - 1;
  const SmoothMap fmap = f.f;
  // η^β: 1 within ε of a level of window β, 0 beyond 2ε, cut off by b^β.
  auto eta = [=](std::size_t b, const Point& x) {
    const double n = x.coords[0];
    const double bump = window_bump(windows[b].U, windows[b].V, n);
    if (bump == 0.0) return 0.0;
    const Point chart = windows[b].psi_objects(x);
    const double value = fmap(Point{0, chart.coords.tail(k)}).coords[0];
    double s = 0.0;
    for (int m : levels[b]) s += smooth_step((2.0 * eps - std::abs(value - m)) / eps);
    return bump * s;
  };
  ChartWeights weights = [=](const Point& x) {
    const std::size_t W = windows.size();
    std::vector<double> eta_v(W);
    for (std::size_t b = 0; b < W; ++b) eta_v[b] = eta(b, x);
    std::vector<double> rho(W);
    double total = 0.0;
    for (std::size_t a = 0; a < W; ++a) {
      rho[a] = window_bump(windows[a].U, windows[a].V, x.coords[0]);
      for (std::size_t b = 0; b < W; ++b) {
        if (b != a) rho[a] *= 1.0 - eta_v[b];
      }
      total += rho[a];
    }
    for (auto& r : rho) r = total > 0.0 ? r / total : 1.0 / static_cast<double>(W);
    return rho;
  };
  BuiltConnection out{weighted_connection(atlas, weights, tol, "complete_builder"), {}};
  out.certificate = flatness_certificate_check(out.connection, atlas, f, schedule_levels(schedule), n_samples, seed, tol);
  if (out.certificate.verdict != CertificateVerdict::CertifiedComplete) {
    throw Error(ErrorCode::CertificateFailure, out.certificate.failed_clause);
  }
  return out;
}

namespace fixtures {

BaseLift exponential_lift(double c) {
  return [c](const Point& x, const VectorXd& w) -> VectorXd {
    VectorXd v(x.coords.size());
    v[0] = w[0];
    v.tail(v.size() - 1) = c * w[0] * x.coords.tail(v.size() - 1);
    return v;
  };
}

BaseLift flat_lift(int base_dim, int total_dim) {
  return [base_dim, total_dim](const Point&, const VectorXd& w) -> VectorXd {
    VectorXd v = VectorXd::Zero(total_dim);
    v.head(base_dim) = w;
    return v;
  };
}

GroupoidPtr bundle_fiber(int order) {
  return catalog::group_bundle(catalog::real_line("F"), {catalog::GroupKind::Finite, order});
}

MorphismPtr bundle_family(const GroupoidPtr& fiber) { return catalog::family_projection(catalog::real_line("N"), fiber); }

TrivializingAtlas two_window_atlas(const MorphismPtr& family, const GroupoidPtr& fiber, const Tolerances& tol) {
  return make_atlas(family, fiber,
                    {{Interval(-3.5, 0.6), Interval(-4.0, 1.0), sine_shift(0.5)},
                     {Interval(-0.6, 3.5), Interval(-1.0, 4.0), affine_shift(0.3, 0.2)}},
                    Interval(-3.0, 3.0), tol);
}

TrivializingAtlas single_window_atlas(const MorphismPtr& family, const GroupoidPtr& fiber, const Tolerances& tol) {
  return make_atlas(family, fiber, {{Interval(-10.0, 10.0), Interval(-11.0, 11.0), constant_shift(0.0)}},
                    Interval(-3.0, 3.0), tol);
}

MorphismPtr rotation_family() { return catalog::family_projection(catalog::real_line("N"), catalog::action(0, false)); }

BaseLift skewed_source_lift() {
  return [](const Point& g, const VectorXd& v) -> VectorXd {
    VectorXd out(4);
    out << v[0], std::sin(g.coords[1]) * v[0], v[1], v[2];
    return out;
  };
}

PathFamily box_paths(const Connection& c, const Interval& box) {
  const MorphismPtr m = c.morphism;
  return [m, box](std::uint64_t seed, std::uint64_t i) {
    Rng r = make_rng(seed, i, 71);
    const double half = 0.5 * (box.hi - box.lo);
    const double amp = uniform(r, 0.3, 0.95) * half;
    const double centre = box.mid() + uniform(r, -1.0, 1.0) * (half - amp);
    const double omega = kTwoPi * uniform_int(r, 1, 3);
    const double phase = uniform(r, 0.0, kTwoPi);
    BasePath p;
    p.space = m->base->arrows;
    p.at = [=](double t) { return Point{0, VectorXd::Constant(1, centre + amp * std::sin(omega * t + phase))}; };
    p.velocity = [=](double t) -> VectorXd { return VectorXd::Constant(1, amp * omega * std::cos(omega * t + phase)); };
    Point g = m->total->sample_arrow(seed, i);
    g.coords[0] = p.at(0.0).coords[0];
    return ProbeSample{p, g};
  };
}

}  // namespace fixtures

}  // namespace mec
