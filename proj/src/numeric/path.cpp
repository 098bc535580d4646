#include "mec/path.hpp"

#include <algorithm>
#include <cmath>

namespace mec {

BasePath constant_path(const Space& space, const Point& p) {
  const Point q = space.normalize(p);
  const auto n = q.coords.size();
  return {space, [q](double) { return q; }, [n](double) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(n); },
          false, true};
}

BasePath linear_path(const Space& space, const Point& p, const Eigen::VectorXd& v) {
  return {space, [space, p, v](double t) { return space.advance(p, t * v); },
          [v](double) -> Eigen::VectorXd { return v; }, false, v.isZero(0.0)};
}

BasePath oscillating_path(const Space& space, const Point& p, const Eigen::VectorXd& v, double cycles) {
  const double w = kTwoPi * cycles;
  return {space, [space, p, v, w](double t) { return space.advance(p, std::sin(w * t) * v); },
          [v, w](double t) -> Eigen::VectorXd { return w * std::cos(w * t) * v; }, false,
          std::floor(cycles) == cycles};
}

BasePath reverse(const BasePath& gamma) {
  BasePath r = gamma;
  r.at = [g = gamma.at](double t) { return g(1.0 - t); };
  r.velocity = [v = gamma.velocity](double t) -> Eigen::VectorXd { return -v(1.0 - t); };
  return r;
}

BasePath subpath(const BasePath& gamma, double a, double b) {
  BasePath r = gamma;
  r.at = [g = gamma.at, a, b](double t) { return g(a + (b - a) * t); };
  r.velocity = [v = gamma.velocity, a, b](double t) -> Eigen::VectorXd { return (b - a) * v(a + (b - a) * t); };
  r.is_loop = false;
  return r;
}

BasePath push_forward(const SmoothMap& f, const BasePath& gamma, const Tolerances& tol) {
  BasePath r;
  r.space = f.codomain;
  r.at = [f, g = gamma.at](double t) { return f(g(t)); };
  r.velocity = [f, gamma, tol](double t) -> Eigen::VectorXd {
    return jacobian(f, gamma.at(t), tol) * gamma.velocity(t);
  };
  r.is_loop = gamma.is_loop;
  return r;
}

BasePath push_forward_pair(const SmoothMap& f, const BasePath& a, const BasePath& b, const Tolerances& tol) {
  BasePath r;
  r.space = f.codomain;
  r.at = [f, a, b](double t) { return f(pack(a.space, b.space, a.at(t), b.at(t))); };
  r.velocity = [f, a, b, tol](double t) -> Eigen::VectorXd {
    const Eigen::VectorXd va = a.velocity(t);
    const Eigen::VectorXd vb = b.velocity(t);
    Eigen::VectorXd v(va.size() + vb.size());
    v << va, vb;
    return jacobian(f, pack(a.space, b.space, a.at(t), b.at(t)), tol) * v;
  };
  r.is_loop = a.is_loop && b.is_loop;
  return r;
}

double velocity_mismatch(const BasePath& gamma, int samples, double step) {
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double t = (i + 1.0) / (samples + 1.0);
    const Eigen::VectorXd fd =
        gamma.space.difference(gamma.at(t + step), gamma.at(t - step)) / (2.0 * step);
    const Eigen::VectorXd diff = fd - gamma.velocity(t);
    if (diff.size() > 0) worst = std::max(worst, diff.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace mec
