#include "mec/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mec/error.hpp"

namespace mec {

namespace {

double threshold(const Eigen::VectorXd& sv, double rank_tol) {
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  return rank_tol * std::max(1.0, smax);
}

}  // namespace

Eigen::VectorXd singular_values(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return Eigen::VectorXd(0);
  return Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
}

int numerical_rank(const Eigen::MatrixXd& a, double rank_tol) {
  const Eigen::VectorXd sv = singular_values(a);
  const double thr = threshold(sv, rank_tol);
  return static_cast<int>((sv.array() > thr).count());
}

double kth_singular_value(const Eigen::MatrixXd& a, int k) {
  if (k <= 0) return std::numeric_limits<double>::infinity();
  const Eigen::VectorXd sv = singular_values(a);
  return k <= sv.size() ? sv[k - 1] : 0.0;
}

Eigen::MatrixXd range_basis(const Eigen::MatrixXd& a, double rank_tol) {
  if (a.size() == 0) return Eigen::MatrixXd(a.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double thr = threshold(sv, rank_tol);
  const int r = static_cast<int>((sv.array() > thr).count());
  return svd.matrixU().leftCols(r);
}

Eigen::MatrixXd null_space(const Eigen::MatrixXd& a, double rank_tol) {
  const auto n = a.cols();
  if (a.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
  if (n == 0) return Eigen::MatrixXd(0, 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double thr = threshold(sv, rank_tol);
  const int r = static_cast<int>((sv.array() > thr).count());
  return svd.matrixV().rightCols(n - r);
}

Eigen::MatrixXd intersect_spans(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double rank_tol) {
  const Eigen::MatrixXd qa = range_basis(a, rank_tol);
  const Eigen::MatrixXd qb = range_basis(b, rank_tol);
  if (qa.cols() == 0 || qb.cols() == 0) return Eigen::MatrixXd(a.rows(), 0);
  Eigen::MatrixXd stacked(qa.rows(), qa.cols() + qb.cols());
  stacked << qa, -qb;
  const Eigen::MatrixXd coeff = null_space(stacked, rank_tol);
  if (coeff.cols() == 0) return Eigen::MatrixXd(a.rows(), 0);
  return range_basis(qa * coeff.topRows(qa.cols()), rank_tol);
}

double min_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double rank_tol) {
  const Eigen::MatrixXd qa = range_basis(a, rank_tol);
  const Eigen::MatrixXd qb = range_basis(b, rank_tol);
  if (qa.cols() == 0 || qb.cols() == 0) return 0.5 * M_PI;
  // Singular values of (I - P_a) Q_b are the sines of the principal angles.
  const Eigen::MatrixXd rest = qb - qa * (qa.transpose() * qb);
  const double s = kth_singular_value(rest, static_cast<int>(qb.cols()));
  return std::asin(std::clamp(s, 0.0, 1.0));
}

double subspace_distance(const Eigen::VectorXd& v, const Eigen::MatrixXd& basis, double rank_tol) {
  if (basis.cols() == 0) return v.norm();
  if (basis.rows() != v.size()) throw Error(ErrorCode::InvalidParams, "basis and vector sizes differ");
  if (numerical_rank(basis, rank_tol) != basis.cols()) {
    throw Error(ErrorCode::DegenerateBasis, "basis columns are linearly dependent");
  }
  const Eigen::MatrixXd q = basis.householderQr().householderQ() * Eigen::MatrixXd::Identity(basis.rows(), basis.cols());
  return (v - q * (q.transpose() * v)).norm();
}

double subspace_residual(const Eigen::VectorXd& v, const Eigen::MatrixXd& basis, double rank_tol) {
  return subspace_distance(v, basis, rank_tol) / std::max(v.norm(), 1.0);
}

double subspace_residual(const Tangent& v, std::span<const Tangent> basis, double rank_tol) {
  Eigen::MatrixXd b(v.coeffs.size(), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const Tangent& e = basis[i];
    if (e.base.patch != v.base.patch || e.coeffs.size() != v.coeffs.size() ||
        (e.base.coords - v.base.coords).norm() > rank_tol * std::max(1.0, v.base.coords.norm())) {
      throw Error(ErrorCode::InvalidParams, "basis vectors are not based at the same point");
    }
    b.col(static_cast<Eigen::Index>(i)) = e.coeffs;
  }
  return subspace_residual(v.coeffs, b, rank_tol);
}

}  // namespace mec
