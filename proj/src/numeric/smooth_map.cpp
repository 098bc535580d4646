#include "mec/smooth_map.hpp"

#include <limits>

#include "mec/error.hpp"

namespace mec {

SmoothMap make_map(Space domain, Space codomain, CoordFn eval, JacFn jac) {
  return {std::move(domain), std::move(codomain), std::move(eval), std::move(jac)};
}

SmoothMap identity_map(const Space& space) {
  return make_map(
      space, space, [](const Point& p) { return p; },
      [](const Point& p) -> Eigen::MatrixXd {
        return Eigen::MatrixXd::Identity(p.coords.size(), p.coords.size());
      });
}

SmoothMap compose(const SmoothMap& outer, const SmoothMap& inner) {
  JacFn jac;
  if (outer.has_jacobian() && inner.has_jacobian()) {
    jac = [outer, inner](const Point& p) -> Eigen::MatrixXd { return outer.jac(inner(p)) * inner.jac(p); };
  } else {
    // Chain rule through finite differences on whichever factor lacks a Jacobian.
    jac = [outer, inner](const Point& p) -> Eigen::MatrixXd {
      const Tolerances tol;
      return jacobian(outer, inner(p), tol) * jacobian(inner, p, tol);
    };
  }
  return make_map(inner.domain, outer.codomain, [outer, inner](const Point& p) { return outer(inner(p)); },
                  std::move(jac));
}

Eigen::MatrixXd finite_difference_jacobian(const SmoothMap& map, const Point& p, double step) {
  const Patch& patch = map.domain.patch(p.patch);
  const Point base = map(p);
  const int n = patch.dim();
  const int m = static_cast<int>(base.coords.size());
  Eigen::MatrixXd jac(m, n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[i] = step;
    const Point plus = map.domain.advance(p, e);
    const Point minus = map.domain.advance(p, -e);
    if (patch.in_exclusion(plus.coords) || patch.in_exclusion(minus.coords)) {
      throw Error(ErrorCode::EvaluationOutsideDomain, "finite-difference probe inside an exclusion ball");
    }
    const Point fp = map(plus);
    const Point fm = map(minus);
    if (fp.patch != base.patch || fm.patch != base.patch) {
      throw Error(ErrorCode::EvaluationOutsideDomain, "finite-difference probe changes output component");
    }
    jac.col(i) = map.codomain.difference(fp, fm) / (2.0 * step);
  }
  return jac;
}

Eigen::MatrixXd jacobian(const SmoothMap& map, const Point& p, const Tolerances& tol) {
  if (map.has_jacobian()) return map.jac(p);
  return finite_difference_jacobian(map, p, tol.fd_step);
}

double jacobian_mismatch(const SmoothMap& map, const Point& p, const Tolerances& tol) {
  if (!map.has_jacobian()) return 0.0;
  const Eigen::MatrixXd a = map.jac(p);
  const Eigen::MatrixXd f = finite_difference_jacobian(map, p, tol.fd_step);
  if (a.rows() != f.rows() || a.cols() != f.cols()) return std::numeric_limits<double>::infinity();
  return a.size() == 0 ? 0.0 : (a - f).cwiseAbs().maxCoeff();
}

}  // namespace mec
