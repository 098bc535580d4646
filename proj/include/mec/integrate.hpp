#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mec/config.hpp"
#include "mec/manifold.hpp"

namespace mec {

enum class TrajectoryStatus { Completed, Escaped };
enum class EscapeReason { NormBlowup, ExcludedPoint, StepCollapse };

const char* to_string(TrajectoryStatus status);
const char* to_string(EscapeReason reason);

// Time-dependent field on the patch of the current point, in patch coordinates.
using VectorField = std::function<Eigen::VectorXd(double t, const Point& p)>;
// Returns false once a point has left the admissible domain.
using DomainGuard = std::function<bool(const Point& p)>;

struct TrajectoryOutcome {
  TrajectoryStatus status = TrajectoryStatus::Completed;
  std::vector<std::pair<double, Point>> samples;
  std::optional<double> escape_time;
  std::optional<EscapeReason> escape_reason;

  bool completed() const { return status == TrajectoryStatus::Completed; }
  const Point& end() const { return samples.back().second; }
  // Sample recorded at exactly `t` (one of the requested output times).
  std::optional<Point> at(double t, double tol_time) const;
};

// Classical RK4 with fixed nominal step tol.h_ode. Every step is compared
// against two half steps; the two-half-step value is kept when the two
// agree within tol.ode_tol * max(1, |x|), otherwise the step is halved.
// Steps are clipped so that every time in `output_times` is hit exactly.
TrajectoryOutcome integrate(const Space& space, const VectorField& field, const Point& p0, double horizon,
                            const DomainGuard& guard, const Tolerances& tol,
                            std::span<const double> output_times = {});

// One classical RK4 step; stage points are normalized, the returned
// coordinates are not.
Eigen::VectorXd rk4_step(const Space& space, const VectorField& field, double t, const Point& p, double h);

}  // namespace mec
