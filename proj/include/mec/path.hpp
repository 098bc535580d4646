#pragma once

#include <functional>

#include "mec/config.hpp"
#include "mec/manifold.hpp"
#include "mec/smooth_map.hpp"

namespace mec {

// Closed-form curve [0,1] -> space with closed-form velocity.
struct BasePath {
  Space space;
  std::function<Point(double)> at;
  std::function<Eigen::VectorXd(double)> velocity;
  bool is_unit_path = false;
  bool is_loop = false;
};

BasePath constant_path(const Space& space, const Point& p);
// t -> p + t * v (angles wrapped).
BasePath linear_path(const Space& space, const Point& p, const Eigen::VectorXd& v);
// t -> p + a * sin(2 pi k t) * v, a loop for integer k.
BasePath oscillating_path(const Space& space, const Point& p, const Eigen::VectorXd& v, double cycles);
// t -> gamma(1 - t).
BasePath reverse(const BasePath& gamma);
// t -> gamma(a + (b - a) t).
BasePath subpath(const BasePath& gamma, double a, double b);
// t -> f(gamma(t)), velocity via the Jacobian of f.
BasePath push_forward(const SmoothMap& f, const BasePath& gamma, const Tolerances& tol);
// Pointwise image of a pair of paths under a map on the product space.
BasePath push_forward_pair(const SmoothMap& f, const BasePath& a, const BasePath& b, const Tolerances& tol);

// Max |gamma'(t) - finite difference| over `samples` interior times.
double velocity_mismatch(const BasePath& gamma, int samples, double step);

}  // namespace mec
