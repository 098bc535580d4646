#include "mec/integrate.hpp"

#include <algorithm>
#include <cmath>

#include "mec/error.hpp"

namespace mec {

const char* to_string(TrajectoryStatus status) {
  return status == TrajectoryStatus::Completed ? "Completed" : "Escaped";
}

const char* to_string(EscapeReason reason) {
  switch (reason) {
    case EscapeReason::NormBlowup: return "NormBlowup";
    case EscapeReason::ExcludedPoint: return "ExcludedPoint";
    case EscapeReason::StepCollapse: return "StepCollapse";
  }
  return "Unknown";
}

std::optional<Point> TrajectoryOutcome::at(double t, double tol_time) const {
  for (const auto& [time, p] : samples) {
    if (std::abs(time - t) <= tol_time) return p;
  }
  return std::nullopt;
}

namespace {

// RK4 with the first stage supplied by the caller.
Eigen::VectorXd rk4_from(const Space& space, const VectorField& field, double t, const Point& p, double h,
                         const Eigen::VectorXd& k1) {
  auto stage = [&](const Eigen::VectorXd& delta) { return space.advance(p, delta); };
  const Eigen::VectorXd k2 = field(t + 0.5 * h, stage(0.5 * h * k1));
  const Eigen::VectorXd k3 = field(t + 0.5 * h, stage(0.5 * h * k2));
  const Eigen::VectorXd k4 = field(t + h, stage(h * k3));
  return p.coords + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Eigen::VectorXd rk4_step(const Space& space, const VectorField& field, double t, const Point& p, double h) {
  return rk4_from(space, field, t, p, h, field(t, p));
}

namespace {

enum class StepResult { Ok, Rejected, OutsideDomain };

bool blown_up(const Eigen::VectorXd& x, double bound) {
  return !x.allFinite() || (x.size() > 0 && x.cwiseAbs().maxCoeff() > bound);
}

// True when the chord from a to b passes through an exclusion ball, so a
// step cannot jump over a removed point.
bool chord_hits_exclusion(const Patch& patch, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd d = patch.difference(b, a);
  const double dd = d.squaredNorm();
  for (const auto& e : patch.excluded()) {
    const Eigen::VectorXd r = patch.difference(a, e.coords);
    const double s = dd > 0.0 ? std::clamp(-r.dot(d) / dd, 0.0, 1.0) : 0.0;
    if ((r + s * d).norm() < e.radius) return true;
  }
  return false;
}

}  // namespace

TrajectoryOutcome integrate(const Space& space, const VectorField& field, const Point& p0, double horizon,
                            const DomainGuard& guard, const Tolerances& tol, std::span<const double> output_times) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::InvalidHorizon, "horizon must be positive and finite");
  }
  std::vector<double> stops;
  for (double t : output_times) {
    if (t > 0.0 && t < horizon) stops.push_back(t);
  }
  stops.push_back(horizon);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  TrajectoryOutcome out;
  auto escape = [&out](double t, EscapeReason reason) {
    out.status = TrajectoryStatus::Escaped;
    out.escape_time = t;
    out.escape_reason = reason;
    return out;
  };
  auto admissible = [&](const Point& p) {
    return !space.patch(p.patch).in_exclusion(p.coords) && (!guard || guard(p));
  };

  Point p = space.normalize(p0);
  out.samples.emplace_back(0.0, p);
  if (blown_up(p.coords, tol.blowup_bound)) return escape(0.0, EscapeReason::NormBlowup);
  if (!admissible(p)) return escape(0.0, EscapeReason::ExcludedPoint);

  const double h_min = std::ldexp(tol.h_ode, -tol.max_halvings);
  double h = tol.h_ode;
  double t = 0.0;
  std::size_t next_stop = 0;

  while (next_stop < stops.size()) {
    const double target = stops[next_stop];
    const bool clipped = target - t <= h;
    const double step = clipped ? target - t : h;

    Eigen::VectorXd full;
    Eigen::VectorXd fine;
    bool outside = false;
    try {
      const Eigen::VectorXd k1 = field(t, p);
      full = rk4_from(space, field, t, p, step, k1);
      const Point mid = space.advance(p, rk4_from(space, field, t, p, 0.5 * step, k1) - p.coords);
      if (!admissible(mid)) {
        outside = true;
      } else {
        fine = rk4_step(space, field, t + 0.5 * step, mid, 0.5 * step);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EvaluationOutsideDomain) throw;
      outside = true;
    }

    double err = 0.0;
    double scale = 1.0;
    if (!outside) {
      err = space.patch(p.patch).difference(full, fine).norm();
      scale = std::max(1.0, fine.norm());
    }
    if (outside || !std::isfinite(err) || err > tol.ode_tol * scale) {
      if (!outside && blown_up(fine, tol.blowup_bound)) return escape(t, EscapeReason::NormBlowup);
      if (0.5 * step < h_min) {
        return escape(t, outside ? EscapeReason::ExcludedPoint : EscapeReason::StepCollapse);
      }
      h = 0.5 * step;
      continue;
    }

    const Point q = space.advance(p, fine - p.coords);
    if (blown_up(q.coords, tol.blowup_bound)) return escape(t, EscapeReason::NormBlowup);
    if (!admissible(q) || (q.patch == p.patch && chord_hits_exclusion(space.patch(p.patch), p.coords, q.coords))) {
      return escape(t, EscapeReason::ExcludedPoint);
    }

    t = clipped ? target : t + step;
    p = q;
    out.samples.emplace_back(t, p);
    if (clipped) ++next_stop;
    if (err < tol.ode_tol * scale / 32.0 && h < tol.h_ode) h = std::min(tol.h_ode, 2.0 * h);
  }
  return out;
}

}  // namespace mec
