#pragma once

#include <functional>

#include "mec/config.hpp"
#include "mec/manifold.hpp"

namespace mec {

using CoordFn = std::function<Point(const Point&)>;
using JacFn = std::function<Eigen::MatrixXd(const Point&)>;

// A smooth map between coordinate models, evaluated patchwise. `jac` is
// optional; when empty, Jacobians come from central differences.
struct SmoothMap {
  Space domain;
  Space codomain;
  CoordFn eval;
  JacFn jac;

  Point operator()(const Point& p) const { return eval(p); }
  bool has_jacobian() const { return static_cast<bool>(jac); }
};

SmoothMap make_map(Space domain, Space codomain, CoordFn eval, JacFn jac = {});
SmoothMap identity_map(const Space& space);
SmoothMap compose(const SmoothMap& outer, const SmoothMap& inner);

// Analytic Jacobian when present, otherwise central finite differences with
// step tol.fd_step. Throws EvaluationOutsideDomain when a probe point falls
// into an exclusion ball or changes output patch.
Eigen::MatrixXd jacobian(const SmoothMap& map, const Point& p, const Tolerances& tol);
Eigen::MatrixXd finite_difference_jacobian(const SmoothMap& map, const Point& p, double step);

// Max-abs difference between the analytic and the finite-difference Jacobian
// (zero for maps without an analytic Jacobian).
double jacobian_mismatch(const SmoothMap& map, const Point& p, const Tolerances& tol);

}  // namespace mec
