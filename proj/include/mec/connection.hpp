#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mec/groupoid.hpp"

namespace mec {

// a in T_{pi(g)} H  ->  horizontal vector in T_g G.
using HorLift = std::function<Eigen::VectorXd(const Point& g, const Eigen::VectorXd& a)>;
// w in T_{pi0(x)} N  ->  horizontal vector in T_x M.
using BaseLift = std::function<Eigen::VectorXd(const Point& x, const Eigen::VectorXd& w)>;

struct Connection {
  MorphismPtr morphism;
  HorLift hor;
  BaseLift hor0;
  bool claimed_multiplicative = false;
  std::string provenance;

  // Horizontal frame at g: images of the coordinate basis of T_{pi(g)} H.
  Eigen::MatrixXd frame(const Point& g) const;
  Eigen::MatrixXd base_frame(const Point& x) const;
};

// Tπ∘hor = id and Tπ0∘hor0 = id, linearity of hor, and the minimal angle
// between im hor and ker Tπ. Throws RankDeficientLift when hor has rank
// below dim T_{pi(g)} H.
Report complement_check(const Connection& c, std::size_t n_samples, std::uint64_t seed, const Tolerances& tol);

struct ProductProbe {
  Point g;
  Point h;
  Eigen::VectorXd a;
  Eigen::VectorXd b;
};

struct ProductClause {
  Eigen::VectorXd produced;  // Tm(hor_g a, hor_h b)
  Eigen::VectorXd required;  // hor_{gh} Tm_H(a, b)
  double residual() const { return (produced - required).norm(); }
};

ProductClause product_clause(const Connection& c, const ProductProbe& probe, const Tolerances& tol);

struct MultiplicativityReport {
  Report source;
  Report target;
  Report unit;
  Report inverse;
  Report product;
  Report base_restriction;
  MultVerdict verdict = MultVerdict::Inconclusive;

  std::array<const Report*, 6> clauses() const {
    return {&source, &target, &unit, &inverse, &product, &base_restriction};
  }
  double worst() const;
  // Name of the clause with the largest residual.
  std::string worst_clause() const;
};

struct PointwiseOptions {
  std::vector<ProductProbe> pinned;
};

MultiplicativityReport multiplicativity_check_pointwise(const Connection& c, std::size_t n_samples,
                                                        std::uint64_t seed, const Tolerances& tol,
                                                        const PointwiseOptions& options = {});

// Random base tangents (a, b) at (pi(g), pi(h)) with Ts_H a = Tt_H b.
std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> composable_base_tangents(const Connection& c,
                                                                                  const Point& g, const Point& h,
                                                                                  std::uint64_t seed,
                                                                                  std::uint64_t index,
                                                                                  const Tolerances& tol);

// hor^K(k, w) = Dι⁺ hor(ι(k), Tu_H w) on the kernel family. Throws
// KernelNotExposed when the morphism carries no kernel.
Connection kernel_connection(const Connection& c, const Tolerances& tol);
// ‖Dι z − hor(ι(k), Tu_H w)‖ at sampled kernel arrows, i.e. how far the
// lift leaves the kernel.
Report kernel_tangency(const Connection& c, std::size_t n_samples, std::uint64_t seed, const Tolerances& tol);

// hor(g, a) = hor1(g, hor2(pi1(g), a)). Throws IncompatibleMorphisms.
Connection compose_connections(const Connection& c1, const Connection& c2);

struct ActionOutcome {
  std::optional<Connection> connection;
  Report invariance;         // Tt_G(ξ, hor0(x, Ts_H ξ)) against hor0(t(g), Tt_H ξ)
  Report lie_algebra;        // ρ(ξ) against Hor0 at units, ξ in ker Ts_H
  double landmark_residual = 0.0;  // Lie-algebra clause at the first landmark object
  bool rejected() const { return !connection.has_value(); }
};

// hor((h, x), a) = (a, hor0(x, Ts_H a)). Throws NotAnActionMorphism.
Connection action_candidate(const MorphismPtr& am, const BaseLift& hor0, const Tolerances& tol);
// Checks the candidate; the connection is returned only when it passes.
ActionOutcome action_connection(const MorphismPtr& am, const BaseLift& hor0, std::size_t n_samples,
                                std::uint64_t seed, const Tolerances& tol);

using ObjectField = std::function<Eigen::VectorXd(const Point& x)>;
using ArrowField = std::function<Eigen::VectorXd(const Point& g)>;

// Ts X_G = X_M s, Tt X_G = X_M t and Tm(X_G, X_G) = X_G m at samples.
Report multiplicative_field_check(const Groupoid& G, const ArrowField& XG, const ObjectField& XM,
                                  std::size_t n_samples, std::uint64_t seed, const Tolerances& tol);

struct LiftedField {
  ArrowField arrows;
  ObjectField objects;
  Report report;
};

// g -> hor(g, X(pi(g))) for a family. Throws NotAFamily.
LiftedField multiplicative_vf_lift(const Connection& c, const ObjectField& X, std::size_t n_samples,
                                   std::uint64_t seed, const Tolerances& tol);

// Standard connections on catalog morphisms.
namespace connections {

// (x, y) -> (a, x^2 a) on R^2 -> S^1.
Connection luca();
// hor(g, a) = (a, 0) for morphisms projecting onto leading coordinates.
Connection product(const MorphismPtr& m);
// Hor0 x Hor0 on Pair(N x F) -> Pair(N) with the flat Hor0.
Connection pair_product(const MorphismPtr& m);
// hor = id on an identity morphism.
Connection identity(const MorphismPtr& m);

}  // namespace connections

}  // namespace mec
