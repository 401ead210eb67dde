#include "admit/trajectory.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace admit {

namespace {

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

using PosFn = std::function<Vec(double)>;  // tau in [0,1] -> pose

struct Phase {
  double duration;
  PosFn pos;
};

TrajectorySamples sample_phases(const std::vector<Phase>& phases, int axes,
                                double dt) {
  std::vector<Vec> pts;
  for (const auto& ph : phases) {
    const int n = std::max(1, static_cast<int>(std::round(ph.duration / dt)));
    for (int i = 0; i < n; ++i)
      pts.push_back(ph.pos(static_cast<double>(i) / n));
  }
  pts.push_back(phases.back().pos(1.0));

  const int steps = static_cast<int>(pts.size());
  TrajectorySamples out;
  out.pos.resize(steps, axes);
  out.vel.setZero(steps, axes);
  out.acc.setZero(steps, axes);
  for (int i = 0; i < steps; ++i) out.pos.row(i) = pts[i].transpose();
  // velocities/accelerations as backward differences keeps the plan
  // kinematically consistent by construction
  for (int i = 1; i < steps; ++i) {
    out.vel.row(i) = (out.pos.row(i) - out.pos.row(i - 1)) / dt;
    out.acc.row(i) = (out.vel.row(i) - out.vel.row(i - 1)) / dt;
  }
  return out;
}

PosFn line(const Vec& from, const Vec& to) {
  return [from, to](double tau) -> Vec {
    return from + smoothstep(tau) * (to - from);
  };
}

PosFn hold(const Vec& at) {
  return [at](double) -> Vec { return at; };
}

}  // namespace

TrajectoryPlan scripted_trajectory(Task task, const Geometry& geo,
                                   const Vec& start_pose, double dt) {
  if (dt <= 0) throw ConfigError("scripted_trajectory: dt must be > 0");
  TrajectoryPlan plan;
  plan.task = task;
  plan.dt = dt;

  switch (task) {
    case Task::Wall1D: {
      if (start_pose.size() != 1)
        throw ConfigError("scripted_trajectory: wall start pose must be 1-D");
      // fast approach puts first contact inside the first adaptation window;
      // shallow press holds contact without burying the tool
      Vec press(1);
      press << -0.0035;
      plan.samples = sample_phases(
          {{0.9, line(start_pose, press)}, {4.1, hold(press)}}, 1, dt);
      break;
    }
    case Task::Assembly2D: {
      if (start_pose.size() != 2)
        throw ConfigError("scripted_trajectory: assembly start pose must be 2-D");
      if (geo.hole_depth < 0.8 * geo.peg_length)
        throw ConfigError("scripted_trajectory: hole shallower than insertion depth");
      Vec hover(2), pressed(2), inserted(2);
      hover << start_pose[0], 0.002;
      pressed << 0.0, -0.002;
      inserted << 0.0, -(geo.hole_depth - 0.002);
      plan.samples = sample_phases({{2.0, line(start_pose, hover)},
                                    {3.0, line(hover, pressed)},
                                    {3.0, line(pressed, inserted)},
                                    {2.0, hold(inserted)}},
                                   2, dt);
      break;
    }
    case Task::Pivot2D: {
      if (start_pose.size() != 2)
        throw ConfigError("scripted_trajectory: pivot start pose must be 2-D");
      const double push_depth = 0.035;  // commanded penetration past the face
      if (geo.object_length <= push_depth)
        throw ConfigError("scripted_trajectory: object too short to push");
      const double r = geo.object_length - push_depth;
      const double q_c = 0.7 * geo.object_thickness;  // push height on the face
      const double phi_end = 87.0 * M_PI / 180.0;
      auto arc = [r, q_c, phi_end](double tau) -> Vec {
        const double phi = smoothstep(tau) * phi_end;
        Vec p(2);
        p[0] = r * std::cos(phi) - q_c * std::sin(phi);
        p[1] = r * std::sin(phi) + q_c * std::cos(phi);
        return p;
      };
      const Vec engage = arc(0.0);
      plan.samples = sample_phases({{2.0, line(start_pose, engage)},
                                    {15.0, arc},
                                    {3.0, hold(arc(1.0))}},
                                   2, dt);
      break;
    }
  }
  return plan;
}

}  // namespace admit
