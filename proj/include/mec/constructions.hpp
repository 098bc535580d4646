#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mec/connection.hpp"
#include "mec/interval.hpp"
#include "mec/transport.hpp"

namespace mec {

// ---------------------------------------------------------------- Morita

// hor((f_x, h, f_y), a) = (hor0(t(g), Tt_H a), a, hor0(s(g), Ts_H a)) on a
// pullback projection, written in the (f_x, h, f_y) chart. Throws
// NotASubmersion when Tπ0 drops rank at a sampled object.
Connection morita_connection(const MorphismPtr& pullback_proj, const BaseLift& hor0, const Tolerances& tol);

// Max |hor_a(g, e_i) - hor_b(g, e_i)| and the same for hor0, over sampled
// arrows and coordinate basis vectors.
Report compare_connections(const Connection& a, const Connection& b, std::size_t n_samples, std::uint64_t seed,
                           const Tolerances& tol);

// ---------------------------------------------------------------- atlases

// A translation of the fibre coordinates by c(n) over a one-dimensional base.
struct FiberShift {
  std::function<double(double)> c;
  std::function<double(double)> dc;
  std::function<Interval(const Interval&)> enclose;
};

FiberShift constant_shift(double value);
FiberShift sine_shift(double amplitude);
FiberShift affine_shift(double slope, double offset);

struct AtlasWindow {
  Interval U;
  Interval V;
  FiberShift shift;
  // ψ(n, f) = (n, f - c(n)) on every patch, and its inverse.
  SmoothMap psi_arrows;
  SmoothMap psi_inv_arrows;
  SmoothMap psi_objects;
  SmoothMap psi_inv_objects;
};

// Local trivializations of a family N x F -> N with N = R whose fibre
// structure maps commute with diagonal translations of the fibre
// coordinates (pair groupoids, group bundles with discrete group).
struct TrivializingAtlas {
  MorphismPtr family;
  GroupoidPtr fiber;
  std::vector<AtlasWindow> windows;
  Interval box;  // base region in which the atlas is used
};

struct WindowSpec {
  Interval U;
  Interval V;
  FiberShift shift;
};

// Throws AtlasMismatch when the family is not over a one-dimensional base
// or when some closure(U) is not inside V with the configured margin.
TrivializingAtlas make_atlas(const MorphismPtr& family, const GroupoidPtr& fiber, std::vector<WindowSpec> windows,
                             Interval box, const Tolerances& tol);

// pr1∘ψ = π and compatibility of ψ with source, target and multiplication.
Report atlas_check(const TrivializingAtlas& atlas, std::size_t n_samples, std::uint64_t seed, const Tolerances& tol);

// hor^α(g, w) = Dψ^α⁻¹(w, 0).
Eigen::VectorXd window_lift(const AtlasWindow& w, const Point& g, const Eigen::VectorXd& v, const Tolerances& tol);
Eigen::VectorXd window_base_lift(const AtlasWindow& w, const Point& x, const Eigen::VectorXd& v,
                                 const Tolerances& tol);

// ---------------------------------------------------------------- gluing

// Smooth on R, equal to 0 for t <= 0 and to 1 for t >= 1.
double smooth_step(double t);
// 1 on closure(U), 0 outside V.
double window_bump(const Interval& U, const Interval& V, double n);

using BaseFunction = std::function<double(double n)>;
using ObjectFunction = std::function<double(const Point& x)>;

// b^α / Σ b^β with the bumps of the atlas windows.
std::vector<BaseFunction> standard_partition(const TrivializingAtlas& atlas);

// hor = Σ χ^α(π(g)) hor^α. Throws PartitionGap when Σ χ^α differs from 1 on
// the atlas box by more than partition_tol.
Connection glue_local_trivial(const TrivializingAtlas& atlas, const std::vector<BaseFunction>& partition,
                              const Tolerances& tol);

// ---------------------------------------------------------------- averaging

struct AveragedField {
  ArrowField arrows;
  ObjectField objects;
  Report report;  // multiplicative vector field identities
};

// Throws NonProjectableInput when Ts X differs along sampled source fibres.
Report projectability_check(const Groupoid& G, const ArrowField& X, std::size_t n_samples, std::uint64_t seed,
                            const Tolerances& tol);

// X̂_g = Σ w_j Tm(X_{g h_j}, Ti X_{h_j}) over Haar nodes h_j in t⁻¹(s(g)).
// Throws QuadratureMissing or NonProjectableInput.
AveragedField haar_average(const GroupoidPtr& G, const ArrowField& X, int nodes, std::size_t n_samples,
                           std::uint64_t seed, const Tolerances& tol);

// Max |X(g) - Y(g)| over sampled arrows.
double field_distance(const Groupoid& G, const ArrowField& X, const ArrowField& Y, std::size_t n_samples,
                      std::uint64_t seed);

// Averages the composite lifts hor_s(g, hor0(s(g), e_i)) of the base basis
// fields and assembles the connection by linearity.
Connection proper_family_connection(const MorphismPtr& family, const BaseLift& hor0, const BaseLift& hor_s,
                                    int nodes, const Tolerances& tol);

// ---------------------------------------------------------------- exhaustion

struct Exhaustion {
  SmoothMap f;  // objects of the fibre -> R
  // Enclosure of f over a box of fibre coordinates.
  std::function<Interval(const IntervalBox&)> enclose;
  // Radius of the level set {f = m} in the line coordinates.
  std::function<Interval(const Interval&)> level_radius;
  bool constant = false;
  Report report;
};

// f(x) = sqrt(|x_lin|^2 + 1), constant 1 for compact fibres. Throws
// NotSourceProper when the fibre is not declared source-proper.
Exhaustion invariant_exhaustion(const GroupoidPtr& fiber, std::size_t n_samples, std::uint64_t seed,
                                const Tolerances& tol);

// ---------------------------------------------------------------- levels

struct SlabOverlap {
  std::size_t window_a = 0;
  std::size_t level_a = 0;
  std::size_t window_b = 0;
  std::size_t level_b = 0;
};

struct LevelSchedule {
  double epsilon = 0.1;
  std::size_t depth = 0;
  std::vector<std::vector<int>> levels;  // levels[α][i] = n(i, α)
  std::vector<Interval> suprema;         // recorded per (i, α) in lexicographic order
  std::vector<SlabOverlap> overlaps;
  bool disjoint() const { return overlaps.empty(); }
};

// n(i, α) = max(n(i-1, α) + 1, floor(sup + 2ε) + 1) with the supremum of f
// in the chart of α over every earlier slab of another window whose base
// window meets closure(V^α). Throws SupremumUnbounded.
LevelSchedule level_schedule(const TrivializingAtlas& atlas, const Exhaustion& f, std::size_t depth,
                             const Tolerances& tol, double epsilon = 0.1);

// Recomputes the overlap list of a schedule by interval arithmetic.
void verify_disjointness(LevelSchedule& schedule, const TrivializingAtlas& atlas, const Exhaustion& f);

// ---------------------------------------------------------------- certificate

enum class CertificateVerdict { CertifiedComplete, NotCertified };
const char* to_string(CertificateVerdict v);

struct WindowCertificate {
  std::size_t window = 0;
  Report flatness;                      // clause (1)
  std::vector<Interval> component_radii;  // clause (2), one per bounded component
  bool bounded = false;
};

struct CompletenessCertificate {
  std::vector<WindowCertificate> windows;
  CertificateVerdict verdict = CertificateVerdict::NotCertified;
  std::string failed_clause;
};

// Level values per window, as values of the exhaustion in that chart.
using LevelSets = std::vector<std::vector<double>>;

// Clause (1): Dψ^α(hor) = (w, 0) on U^α x s⁻¹(S^α) within flat_tol.
// Clause (2): the components of F \ S^α below the top level are bounded,
// with interval-arithmetic radii. Throws AtlasMismatch.
CompletenessCertificate flatness_certificate_check(const Connection& c, const TrivializingAtlas& atlas,
                                                   const Exhaustion& f, const LevelSets& levels,
                                                   std::size_t n_samples, std::uint64_t seed, const Tolerances& tol);

struct BuiltConnection {
  Connection connection;
  CompletenessCertificate certificate;
};

// hor = Σ (χ^α∘s) hor^α with χ^α = ρ^α / Σ ρ, ρ^α = b^α ∏_{β≠α} (1 - η^β),
// η^β = 1 on the slabs of window β. Throws CertificateFailure.
BuiltConnection complete_connection_builder(const TrivializingAtlas& atlas, const Exhaustion& f,
                                            const LevelSchedule& schedule, std::size_t n_samples,
                                            std::uint64_t seed, const Tolerances& tol);

LevelSets schedule_levels(const LevelSchedule& schedule);

// ---------------------------------------------------------------- fixtures

namespace fixtures {

// (n, f) -> n with hor0((n, f), w) = (w, c f w).
BaseLift exponential_lift(double c);
// hor0(x, w) = (w, 0) for a projection onto the leading coordinates.
BaseLift flat_lift(int base_dim, int total_dim);

// R x Z_order over R; source-proper, exhaustion sqrt(f^2 + 1).
GroupoidPtr bundle_fiber(int order);
// R x fiber -> R.
MorphismPtr bundle_family(const GroupoidPtr& fiber);
// Windows (-3.5, 0.6) ⊂ (-4, 1) and (-0.6, 3.5) ⊂ (-1, 4) with shifts
// 0.5 sin n and 0.3 n + 0.2, box [-3, 3].
TrivializingAtlas two_window_atlas(const MorphismPtr& family, const GroupoidPtr& fiber, const Tolerances& tol);
TrivializingAtlas single_window_atlas(const MorphismPtr& family, const GroupoidPtr& fiber, const Tolerances& tol);

// R x (SO(2) x| R^2) -> R with the flat base lift and the source lift
// (v_n, v_p) -> (v_n, sin(θ) v_n, v_p).
MorphismPtr rotation_family();
BaseLift skewed_source_lift();

// Oscillating base paths with |n| <= box edge, several cycles each, started
// at random arrows over n(0).
PathFamily box_paths(const Connection& c, const Interval& box);

}  // namespace fixtures

}  // namespace mec
