#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "mec/groupoid.hpp"

namespace mec {

struct ArrowTangentMaps {
  Eigen::MatrixXd Ts;
  Eigen::MatrixXd Tt;
  Eigen::MatrixXd Ti;
  Eigen::MatrixXd Tu_at_source;  // Tu at s(g)
  Eigen::MatrixXd Tu_at_target;  // Tu at t(g)
};

ArrowTangentMaps tangent_structure_maps(const Groupoid& G, const Point& g, const Tolerances& tol);

// Tangent multiplication at a composable pair, restricted to the
// composable-pair subspace {(u, v) : Ts u = Tt v}.
struct PairTangentMaps {
  Eigen::MatrixXd composable_basis;  // columns (u, v) in T_g G + T_h G
  Eigen::MatrixXd Tm;                // Jacobian of mul on the whole product
  Eigen::MatrixXd Tm_restricted;     // Tm * composable_basis
};

PairTangentMaps tangent_structure_maps(const Groupoid& G, const Point& g, const Point& h, const Tolerances& tol);

// Columns span the candidate fibre S_g.
using FrameField = std::function<Eigen::MatrixXd(const Point& g)>;

struct VbCheckOptions {
  // Extra composable pairs checked before the sampled ones.
  std::vector<std::pair<Point, Point>> pinned_pairs;
  // Random combinations per composable pair, besides the basis and their sum.
  int combinations = 3;
};

// Sampled test that S is closed under Ti, Tu∘Ts, Tu∘Tt and Tm. The worst
// residual is the unnormalized flat-gauge distance; the normalized value of
// subspace_residual at the worst sample is quoted in the note. Throws
// FrameRankMismatch when the frame rank or the rank of S|_M ∩ TM varies
// within a patch.
Report vb_subgroupoid_check(const Groupoid& G, const FrameField& frames, std::size_t n_samples, std::uint64_t seed,
                            const Tolerances& tol, const VbCheckOptions& options = {});

struct VbFiberData {
  Eigen::MatrixXd iota;  // fibre of Gamma into Gamma'
  Eigen::MatrixXd proj;  // Gamma' onto Gamma''
  std::optional<Eigen::MatrixXd> h;
  std::optional<Eigen::MatrixXd> p;
  std::optional<Eigen::MatrixXd> C;
};

enum class SplittingDatum { RightSplitting, LeftSplitting, Complement };

struct SplittingResult {
  VbFiberData data;  // all of h, p and C filled in
  Eigen::MatrixXd Phi;
  Eigen::MatrixXd Phi_inv;
  double residual_decomposition = 0.0;  // ‖h π + ι p − id‖
  double residual_phi = 0.0;            // max of ‖Φ Φ⁻¹ − id‖, ‖Φ⁻¹ Φ − id‖
  double residual_complement = 0.0;     // C = ker p = im h
  double residual_input = 0.0;          // recovered datum against the supplied one
  double worst() const;
};

// Throws NotASplitting when the short exact sequence or the supplied datum
// fails its defining identity.
SplittingResult splitting_correspondence(const VbFiberData& d, SplittingDatum given);

// Random short exact sequence with a random right splitting.
VbFiberData random_splitting_fixture(std::uint64_t seed, std::uint64_t index);

struct CoreSide {
  Eigen::MatrixXd core;  // S ∩ ker Ts at u(x)
  Eigen::MatrixXd side;  // S ∩ im Tu at u(x)
  double complement_residual = 0.0;
};

// Splits S_{u(x)} along Γ|_M = C ⊕ E with Tu∘Ts as the projection onto E.
// Throws DegenerateBasis when the columns of `frame` are dependent.
CoreSide core_side_decomposition(const Groupoid& G, const Point& x, const Eigen::MatrixXd& frame,
                                 const Tolerances& tol);

}  // namespace mec
