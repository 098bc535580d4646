#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mec/connection.hpp"
#include "mec/integrate.hpp"
#include "mec/path.hpp"

namespace mec {

struct TransportOutcome {
  TrajectoryOutcome trajectory;
  std::optional<Point> end;
  double drift = 0.0;  // max dist(pi(tau(t)), gamma(t)) over recorded samples

  bool completed() const { return trajectory.completed(); }
};

// Integrates dτ/dt = hor(τ, γ'(t)) from g on the arrows of the total
// groupoid. Throws StartFiberMismatch when pi(g) is not at γ(0).
TransportOutcome parallel_transport(const Connection& c, const BasePath& gamma, const Point& g, double t1,
                                    const Tolerances& tol, std::span<const double> output_times = {});
// Same for objects with the base lift hor0 along a path of base objects.
TransportOutcome object_transport(const Connection& c, const BasePath& delta, const Point& x, double t1,
                                  const Tolerances& tol, std::span<const double> output_times = {});

struct HolonomyResult {
  std::vector<TransportOutcome> images;
  Report deviation;        // dist(τ_γ(g), g)
  Report reverse_identity; // dist(τ_γ̄(τ_γ(g)), g)
  std::size_t escaped = 0;
};

// Throws NotALoop.
HolonomyResult holonomy(const Connection& c, const BasePath& loop, const std::vector<Point>& starts,
                        const Tolerances& tol);

struct ProbeSample {
  BasePath path;
  Point start;
};
using PathFamily = std::function<ProbeSample(std::uint64_t seed, std::uint64_t index)>;

enum class ProbeKind { NoCounterexampleFound, IncompleteWitness };
const char* to_string(ProbeKind kind);

struct CompletenessVerdict {
  ProbeKind kind = ProbeKind::NoCounterexampleFound;
  std::size_t budget = 0;
  std::size_t attempted = 0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> path_index;
  std::optional<Point> start;
  std::optional<double> escape_time;
  std::optional<EscapeReason> reason;
};

// Stops at the first escaping lift; never certifies completeness.
CompletenessVerdict completeness_probe(const Connection& c, const PathFamily& paths, std::size_t budget,
                                       std::uint64_t seed, const Tolerances& tol);
// Same with the base lift hor0 on objects.
CompletenessVerdict base_completeness_probe(const Connection& c, const PathFamily& paths, std::size_t budget,
                                            std::uint64_t seed, const Tolerances& tol);

// Random arrow paths of the base groupoid started at random total arrows.
PathFamily random_arrow_paths(const Connection& c, double speed = 1.0);
// Random object paths of the base started at random total objects.
PathFamily random_object_paths(const Connection& c, double speed = 1.0);
// Alternates between two families.
PathFamily interleave(PathFamily a, PathFamily b);

struct TransportMultiplicativityReport {
  Report source;
  Report target;
  Report inverse;
  Report product;
  Report unit;
  std::size_t inconclusive = 0;
  std::size_t completed = 0;
  MultVerdict verdict = MultVerdict::Inconclusive;

  double worst() const;
  std::string worst_clause() const;
};

struct PinnedPathPair {
  Point g;
  Point h;
  BasePath gamma;
  BasePath eta;
};

// Clauses of the path criterion at t = 1/3, 2/3, 1 along sampled composable
// path pairs; samples with an escaped leg count as inconclusive.
TransportMultiplicativityReport transport_multiplicativity_check(const Connection& c, std::size_t n_pairs,
                                                                 std::uint64_t seed, const Tolerances& tol,
                                                                 const std::vector<PinnedPathPair>& pinned = {});

struct CurrentGroupoidReport {
  Report injectivity;     // (π∘τ, τ(0)) recovers (γ, g)
  Report reconstruction;  // τ rebuilt from (π∘τ, τ(0)) at half the step
  bool surjectivity_applicable = true;
  std::size_t escaped = 0;
};

CurrentGroupoidReport current_groupoid_check(const Connection& c, std::size_t n_samples, std::uint64_t seed,
                                             const Tolerances& tol);

struct ConsistencyReport {
  CompletenessVerdict total;
  CompletenessVerdict kernel;
  CompletenessVerdict base;
  bool fibration = false;
  bool kernel_source_connected = false;
  bool base_source_connected = false;
  std::vector<std::string> violations;
  std::vector<std::string> notes;
  bool consistent() const { return violations.empty(); }
};

struct CrosscheckInput {
  PathFamily total_paths;
  PathFamily kernel_paths;
  PathFamily base_paths;
  bool fibration = false;
  bool kernel_source_connected = false;
};

// Runs the three probes and flags every implication of the completeness
// theorems that the observed verdicts contradict.
ConsistencyReport theorem_crosscheck_kernel(const Connection& c, const CrosscheckInput& in, std::size_t budget,
                                            std::uint64_t seed, const Tolerances& tol);

// Line-oriented "t c0 c1 ..." records.
void dump_trajectory(std::ostream& os, const TrajectoryOutcome& tr);

}  // namespace mec
