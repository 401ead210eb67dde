#pragma once

#include <optional>
#include <random>
#include <string>

#include "admit/types.hpp"

namespace admit {

enum class Task { Wall1D, Assembly2D, Pivot2D };

Task parse_task(const std::string& tag);
std::string task_name(Task t);

// Axis conventions: Wall1D uses a single vertical axis z (surface at z = 0,
// material below). The 2-D tasks use [x, z].
struct Geometry {
  // assembly
  double hole_half_width = 0.002;   // clearance between peg and hole wall [m]
  double hole_depth = 0.04;         // [m]
  double peg_length = 0.04;         // [m]
  double chamfer_width = 0.004;     // funnel mouth half-extension [m]
  double chamfer_depth = 0.004;     // funnel drop at the hole lip [m]
  double hole_offset = 0.0;         // true hole center vs. the commanded one [m]
  // pivoting
  double object_length = 0.10;      // [m]
  double object_thickness = 0.026;  // [m]
  double object_mass = 0.3;         // [kg]
  double pivot_damping = 0.2;       // rotational rate damping [N m s/rad]
};

struct EnvConfig {
  Task task = Task::Wall1D;
  double k_env = 2000.0;     // contact stiffness [N/m]
  double d_env = 20.0;       // contact damping [N s/m]
  double mu = 0.3;           // Coulomb friction coefficient
  double noise_sigma = 0.2;  // force sensor noise std [N]
  double force_clip = 10.0;  // sensor clip magnitude [N]
  int sensor_latency = 0;    // steps of measurement delay
  unsigned long long seed = 0;
  Geometry geometry;

  void validate() const;
  int axes() const { return task == Task::Wall1D ? 1 : 2; }
};

struct EnvState {
  Vec pos;           // tool pose (tracks the commanded compliant pose)
  Vec vel;
  double pivot_angle = 0.0;      // [rad], pivoting only
  double pivot_rate = 0.0;
  bool in_contact = false;

  static EnvState initial(const EnvConfig& cfg, const Vec& start_pos);
};

// Advances the environment one step under perfect tracking of the commanded
// compliant pose/velocity and returns the raw reaction force on the tool.
// Penalty contact: f_n = k_env max(0, pen) + d_env max(0, pen_rate),
// tangential friction Coulomb-bounded by mu f_n.
Vec env_step(EnvState& env, const EnvConfig& cfg, const Vec& x_c,
             const Vec& v_c, double dt);

// Gaussian measurement noise followed by per-component clipping.
Vec sensor_read(const Vec& raw, const EnvConfig& cfg, std::mt19937_64& rng);

// 10^(1 - ||pos - goal||_2); distance is scaled by `unit_scale` so the
// exponent is meaningful at desk scale (default 1 = meters).
double assembly_reward(const Vec& pos, const Vec& goal, double unit_scale = 1.0);

// pi/2 minus the geodesic distance between the rotations.
double pivot_reward(const Eigen::Matrix3d& R, const Eigen::Matrix3d& R_goal);
double pivot_reward_planar(double angle, double goal_angle);

Eigen::Matrix3d planar_rotation(double angle);  // about the pivot (Y) axis

// Initial tool pose, uniform over the task's randomization box.
Vec randomize_initial_pose(Task task, std::mt19937_64& rng);

struct SuccessMetrics {
  bool success = false;
  std::optional<double> completion_time;  // absent on failure
  double max_force = 0.0;                 // peak |f| over the episode
};

// Geometric success test: assembly = inserted past 80% of the peg length and
// inside the clearance; pivot = within 5 degrees of upright.
bool success_check(Task task, const EnvState& env, const Geometry& geo);

}  // namespace admit
