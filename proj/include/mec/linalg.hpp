#pragma once

#include <Eigen/Dense>

#include <span>

#include "mec/manifold.hpp"

namespace mec {

// Singular values above rank_tol * max(1, sigma_max) count towards the rank.
int numerical_rank(const Eigen::MatrixXd& a, double rank_tol);
Eigen::VectorXd singular_values(const Eigen::MatrixXd& a);
// k-th largest singular value (1-based); 0 when k exceeds the matrix size.
double kth_singular_value(const Eigen::MatrixXd& a, int k);

// Orthonormal basis of the column span.
Eigen::MatrixXd range_basis(const Eigen::MatrixXd& a, double rank_tol);
// Orthonormal basis of the kernel.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& a, double rank_tol);
// Orthonormal basis of span(a) ∩ span(b).
Eigen::MatrixXd intersect_spans(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double rank_tol);
// Smallest principal angle between two column spans, pi/2 if either is trivial.
double min_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double rank_tol);

// ‖v − P v‖ / max(‖v‖, 1) with P the orthogonal projector onto the span of
// the columns of `basis`. Throws DegenerateBasis when the columns are
// dependent.
double subspace_residual(const Eigen::VectorXd& v, const Eigen::MatrixXd& basis, double rank_tol);
double subspace_residual(const Tangent& v, std::span<const Tangent> basis, double rank_tol);
// Unnormalized distance ‖v − P v‖.
double subspace_distance(const Eigen::VectorXd& v, const Eigen::MatrixXd& basis, double rank_tol);

}  // namespace mec
