#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mec/config.hpp"
#include "mec/integrate.hpp"
#include "mec/manifold.hpp"
#include "mec/path.hpp"
#include "mec/report.hpp"
#include "mec/smooth_map.hpp"

namespace mec {

// Declared hypotheses; none of these is verified numerically.
struct GroupoidTraits {
  bool proper = false;
  bool source_proper = false;
  bool source_connected = false;
  bool is_unit = false;
};

using PointSampler = std::function<Point(std::uint64_t seed, std::uint64_t index)>;
using PairSampler = std::function<std::pair<Point, Point>(std::uint64_t seed, std::uint64_t index)>;
// Arrow g with src(g) = x.
using FiberSampler = std::function<Point(const Point& x, std::uint64_t seed, std::uint64_t index)>;
// Closed-form curve starting at the given point.
using PathFrom = std::function<BasePath(const Point& start, std::uint64_t seed, std::uint64_t index)>;
// Curves (a, b) with src(a(t)) = tgt(b(t)) for all t, starting at a composable pair.
using PairPathFrom = std::function<std::pair<BasePath, BasePath>(const Point& g, const Point& h,
                                                                 std::uint64_t seed, std::uint64_t index)>;

struct HaarNode {
  Point arrow;
  double weight = 0.0;
};
// Quadrature on the target fibre t^{-1}(x) with the requested resolution.
using HaarSystem = std::function<std::vector<HaarNode>(const Point& x, int nodes)>;

// A Lie groupoid in coordinates. `mul` is defined on product(arrows, arrows)
// and never reads the source coordinates of its first factor: it uses tgt(h)
// instead, which snaps nearly composable pairs onto the composable locus.
struct Groupoid {
  std::string name;
  Space objects;
  Space arrows;
  SmoothMap src;
  SmoothMap tgt;
  SmoothMap unit;
  SmoothMap inv;
  SmoothMap mul;

  PointSampler sample_object;
  PointSampler sample_arrow;
  PairSampler sample_pair;
  FiberSampler sample_sfiber;
  PathFrom object_path;
  PathFrom arrow_path;
  PairPathFrom pair_paths;

  // Removals that are not balls around single points of one patch.
  DomainGuard arrow_guard;
  DomainGuard object_guard;

  HaarSystem haar;
  std::vector<Point> landmark_objects;
  GroupoidTraits traits;

  bool admits_arrow(const Point& g) const;
  bool admits_object(const Point& x) const;
  Point multiply(const Point& g, const Point& h) const;
  Eigen::MatrixXd mul_jacobian(const Point& g, const Point& h, const Tolerances& tol) const;
};

using GroupoidPtr = std::shared_ptr<const Groupoid>;

struct GroupoidMorphism;
using MorphismPtr = std::shared_ptr<const GroupoidMorphism>;

// The kernel K = pi^{-1}(u(N)) in its own chart, viewed as a family over N.
struct KernelData {
  MorphismPtr family;  // K -> unit groupoid of N
  SmoothMap embed;     // arrows of K -> arrows of G
};

// Arrows of an action groupoid are laid out as [group coords, object coords].
struct ActionLayout {
  int group_dim = 0;
};

struct GroupoidMorphism {
  std::string name;
  GroupoidPtr total;
  GroupoidPtr base;
  SmoothMap arrow_map;
  SmoothMap object_map;
  std::optional<KernelData> kernel;
  std::optional<ActionLayout> action;

  bool is_family() const { return base->traits.is_unit; }
};

struct FibrationVerdict {
  bool submersion_ok = false;
  double min_sv_submersion = kInf;
  bool shriek_submersion_ok = false;
  double min_sv_shriek = kInf;
  bool star_surjective_heuristic = false;
  double worst_uncovered_distance = 0.0;
  std::optional<Witness> uncovered_witness;
  bool uniform_ok = false;
  double min_sv_uniform = kInf;
  std::size_t samples = 0;
  std::uint64_t seed = 0;

  bool fibration() const { return submersion_ok && shriek_submersion_ok && star_surjective_heuristic; }
};

Report check_axioms(const Groupoid& g, std::size_t n_samples, std::uint64_t seed, const Tolerances& tol);
// Analytic against finite-difference Jacobians of all structure maps.
Report check_jacobians(const Groupoid& g, std::size_t n_samples, std::uint64_t seed, const Tolerances& tol);
Report morphism_check(const GroupoidMorphism& m, std::size_t n_samples, std::uint64_t seed,
                      const Tolerances& tol);
FibrationVerdict fibration_probe(const GroupoidMorphism& m, std::size_t n_samples, std::uint64_t seed,
                                 const Tolerances& tol, std::size_t fiber_samples);

// Groupoid whose multiplication is shifted by `offset` in every coordinate.
GroupoidPtr with_corrupted_mul(const GroupoidPtr& g, double offset);
MorphismPtr with_corrupted_object_map(const MorphismPtr& m, double offset);

}  // namespace mec
