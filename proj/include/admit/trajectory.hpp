#pragma once

#include <string>

#include "admit/admittance.hpp"
#include "admit/contact_env.hpp"

namespace admit {

/// Desired-trajectory samples at fixed dt plus the task they were built for.
/// Plans are pure kinematics: they never query the environment.
struct TrajectoryPlan {
  Task task;
  double dt = 0.01;
  TrajectorySamples samples;

  int steps() const { return samples.steps(); }
  double duration() const { return samples.steps() * dt; }
};

// Open-loop scripted motion from the given start pose:
//   wall:     descend and press a fixed depth into the surface, then hold
//   assembly: descend to hover, sweep laterally across the hole region while
//             pressing lightly, then push down to insertion depth and hold
//   pivot:    approach the free end of the object, then sweep the push point
//             along a rising arc to the upright pose and hold
TrajectoryPlan scripted_trajectory(Task task, const Geometry& geo,
                                   const Vec& start_pose, double dt = 0.01);

}  // namespace admit
