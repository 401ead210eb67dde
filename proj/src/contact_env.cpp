#include "admit/contact_env.hpp"

#include <algorithm>
#include <cmath>

namespace admit {

namespace {

constexpr double kGravity = 9.81;
constexpr double kSlipEps = 1e-4;  // regularized Coulomb transition [m/s]

// Coulomb friction magnitude with a linear stiction band around zero slip.
double coulomb(double mu, double f_n, double v_slip) {
  const double sat = std::clamp(v_slip / kSlipEps, -1.0, 1.0);
  return -mu * f_n * sat;
}

double penalty_force(double k, double d, double pen, double pen_rate) {
  if (pen <= 0) return 0.0;
  return k * pen + d * std::max(0.0, pen_rate);
}

}  // namespace

Task parse_task(const std::string& tag) {
  if (tag == "wall") return Task::Wall1D;
  if (tag == "assembly") return Task::Assembly2D;
  if (tag == "pivot") return Task::Pivot2D;
  throw ConfigError("unknown task tag: " + tag);
}

std::string task_name(Task t) {
  switch (t) {
    case Task::Wall1D: return "wall";
    case Task::Assembly2D: return "assembly";
    case Task::Pivot2D: return "pivot";
  }
  return "?";
}

void EnvConfig::validate() const {
  if (k_env < 0 || d_env < 0 || mu < 0 || noise_sigma < 0)
    throw ConfigError("EnvConfig: negative physics parameter");
  if (force_clip <= 0) throw ConfigError("EnvConfig: force_clip must be > 0");
}

EnvState EnvState::initial(const EnvConfig& cfg, const Vec& start_pos) {
  EnvState s;
  s.pos = start_pos;
  s.vel = Vec::Zero(cfg.axes());
  return s;
}

namespace {

Vec wall_force(const EnvConfig& cfg, const Vec& x, const Vec& v) {
  const double pen = -x[0];
  const double pen_rate = -v[0];
  Vec f = Vec::Zero(1);
  f[0] = penalty_force(cfg.k_env, cfg.d_env, pen, pen_rate);
  return f;
}

Vec assembly_force(const EnvConfig& cfg, const Vec& x, const Vec& v) {
  const Geometry& g = cfg.geometry;
  const double xr = x[0] - g.hole_offset;  // relative to the true hole center
  const double z = x[1];
  const double ax = std::abs(xr);
  const double s = xr >= 0 ? 1.0 : -1.0;

  Vec f = Vec::Zero(2);

  if (ax >= g.hole_half_width + g.chamfer_width) {
    // flat table top
    const double fn = penalty_force(cfg.k_env, cfg.d_env, -z, -v[1]);
    if (fn > 0) {
      f[1] = fn;
      f[0] = coulomb(cfg.mu, fn, v[0]);
    }
    return f;
  }

  if (ax >= g.hole_half_width) {
    // chamfer funnel: inclined face dropping toward the hole lip
    const double alpha = std::atan2(g.chamfer_depth, g.chamfer_width);
    const double z_surf = -g.chamfer_depth *
                          (g.hole_half_width + g.chamfer_width - ax) /
                          g.chamfer_width;
    const double gap = z_surf - z;
    if (gap > 0) {
      const double ca = std::cos(alpha), sa = std::sin(alpha);
      // outward surface normal (up and toward the hole center)
      const Eigen::Vector2d n(-s * sa, ca);
      const Eigen::Vector2d t(s * ca, sa);  // upslope, away from center
      const Eigen::Vector2d vel(v[0], v[1]);
      const double pen = gap * ca;
      const double pen_rate = -vel.dot(n);
      const double fn = penalty_force(cfg.k_env, cfg.d_env, pen, pen_rate);
      if (fn > 0) {
        const double ft = coulomb(cfg.mu, fn, vel.dot(t));
        f[0] = fn * n[0] + ft * t[0];
        f[1] = fn * n[1] + ft * t[1];
      }
    }
    return f;
  }

  // inside the hole slot: only the bottom can push back on a point peg tip
  const double pen_bottom = -g.hole_depth - z;
  if (pen_bottom > 0) {
    const double fn = penalty_force(cfg.k_env, cfg.d_env, pen_bottom, -v[1]);
    f[1] = fn;
    f[0] = coulomb(cfg.mu, fn, v[0]);
  }
  return f;
}

Vec pivot_force(EnvState& env, const EnvConfig& cfg, const Vec& x, const Vec& v,
                double dt) {
  const Geometry& g = cfg.geometry;
  const double th = env.pivot_angle;
  const double c = std::cos(th), sn = std::sin(th);
  // object frame: axial along the long edge from the pivot corner,
  // lateral across the thickness
  const double s_ax = x[0] * c + x[1] * sn;
  const double q = -x[0] * sn + x[1] * c;

  Vec f = Vec::Zero(2);
  double torque = 0.0;

  const bool inside = s_ax > 0 && s_ax < g.object_length && q > 0 &&
                      q < g.object_thickness;
  if (inside) {
    // the tool pushes the free-end face; anywhere else on the object it just
    // slides off, so only axial penetration generates force
    const Eigen::Vector2d n(c, sn);           // end-face outward normal
    const Eigen::Vector2d t(-sn, c);          // along the face
    const Eigen::Vector2d vel(v[0], v[1]);

    const double pen = g.object_length - s_ax;
    const double pen_rate = -vel.dot(n);
    const double fn = penalty_force(cfg.k_env, cfg.d_env, pen, pen_rate);
    if (fn > 0) {
      const double surf_speed = env.pivot_rate * s_ax;  // face sweep speed
      const double v_slip = vel.dot(t) - surf_speed;
      const double ft = coulomb(cfg.mu, fn, v_slip);
      f[0] = fn * n[0] + ft * t[0];
      f[1] = fn * n[1] + ft * t[1];
      // reaction on the object, torque about the wall-floor corner
      torque = x[0] * (-f[1]) - x[1] * (-f[0]);
    }
  }

  const double x_com =
      0.5 * g.object_length * c - 0.5 * g.object_thickness * sn;
  torque += -g.object_mass * kGravity * x_com;

  // rate-damped one-way rotation: the floor and wall hold the object when the
  // push is insufficient
  env.pivot_rate = std::max(0.0, torque) / g.pivot_damping;
  env.pivot_angle =
      std::clamp(env.pivot_angle + dt * env.pivot_rate, 0.0, M_PI / 2);
  return f;
}

}  // namespace

Vec env_step(EnvState& env, const EnvConfig& cfg, const Vec& x_c,
             const Vec& v_c, double dt) {
  if (dt <= 0) throw std::domain_error("env_step: dt must be > 0");
  if (!all_finite(x_c) || !all_finite(v_c))
    throw NumericError("env_step: non-finite command");
  if (x_c.size() != cfg.axes())
    throw ShapeError("env_step: command dimension mismatch");

  env.pos = x_c;
  env.vel = v_c;

  Vec f;
  switch (cfg.task) {
    case Task::Wall1D: f = wall_force(cfg, x_c, v_c); break;
    case Task::Assembly2D: f = assembly_force(cfg, x_c, v_c); break;
    case Task::Pivot2D: f = pivot_force(env, cfg, x_c, v_c, dt); break;
  }
  env.in_contact = f.cwiseAbs().maxCoeff() > 0;
  return f;
}

Vec sensor_read(const Vec& raw, const EnvConfig& cfg, std::mt19937_64& rng) {
  Vec out = raw;
  if (cfg.noise_sigma > 0) {
    std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
    for (long i = 0; i < out.size(); ++i) out[i] += noise(rng);
  }
  return out.cwiseMax(-cfg.force_clip).cwiseMin(cfg.force_clip);
}

double assembly_reward(const Vec& pos, const Vec& goal, double unit_scale) {
  if (pos.size() != goal.size())
    throw ShapeError("assembly_reward: dimension mismatch");
  return std::pow(10.0, 1.0 - unit_scale * (pos - goal).norm());
}

double pivot_reward(const Eigen::Matrix3d& R, const Eigen::Matrix3d& R_goal) {
  const double tr = (R_goal * R.transpose()).trace();
  const double arg = std::clamp(0.5 * (tr - 1.0), -1.0, 1.0);
  return M_PI / 2 - std::acos(arg);
}

Eigen::Matrix3d planar_rotation(double angle) {
  return Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitY()).toRotationMatrix();
}

double pivot_reward_planar(double angle, double goal_angle) {
  return pivot_reward(planar_rotation(angle), planar_rotation(goal_angle));
}

Vec randomize_initial_pose(Task task, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
  switch (task) {
    case Task::Wall1D: {
      Vec p(1);
      p[0] = uniform(0.025, 0.035);  // 30 +- 5 mm above the surface
      return p;
    }
    case Task::Assembly2D: {
      Vec p(2);
      p[0] = uniform(-0.030, 0.030);
      p[1] = uniform(0.025, 0.035);
      return p;
    }
    case Task::Pivot2D: {
      Vec p(2);
      p[0] = uniform(0.120, 0.180);  // 150 +- 30 mm from the wall
      p[1] = uniform(0.000, 0.010);  // 5 +- 5 mm above the floor
      return p;
    }
  }
  throw ConfigError("randomize_initial_pose: unknown task");
}

bool success_check(Task task, const EnvState& env, const Geometry& geo) {
  switch (task) {
    case Task::Wall1D:
      return env.in_contact;
    case Task::Assembly2D:
      return -env.pos[1] >= 0.8 * geo.peg_length &&
             std::abs(env.pos[0] - geo.hole_offset) <= geo.hole_half_width;
    case Task::Pivot2D:
      return std::abs(env.pivot_angle - M_PI / 2) <= 5.0 * M_PI / 180.0;
  }
  return false;
}

}  // namespace admit
