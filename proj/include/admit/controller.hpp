#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "admit/contact_env.hpp"
#include "admit/cost.hpp"
#include "admit/optimizer.hpp"
#include "admit/trajectory.hpp"

namespace admit {

enum class ForceSource { RecordReplay, LinearFit };

ForceSource parse_force_source(const std::string& tag);

struct ControlConfig {
  double dt = 0.01;
  double T_update = 1.0;   // adaptation period [s]
  CostWeights weights;
  double eps = 1e-3;
  GainBox box;  // admissible gain range for the online updates
  // Optional per-update cap on |log-gain change| per coordinate (0 = off).
  double trust_radius = 0.0;
  int budget = 200;
  bool adapt = true;
  ForceSource force_source = ForceSource::RecordReplay;
  bool stop_on_success = true;
};

struct UpdateEvent {
  double t = 0.0;
  double cost_before = 0.0;
  double cost_after = 0.0;
  Vec delta_u;
  int evaluations = 0;
  bool applied = true;  // false when the optimizer failed and gains were kept
};

struct EpisodeTrace {
  double dt = 0.01;
  std::vector<double> t;
  Eigen::MatrixXd x_d, x_c;        // step x axes
  Eigen::MatrixXd f_raw, f_meas;
  Eigen::MatrixXd gain_m, gain_k, gain_d;
  std::vector<char> contact;
  std::vector<double> cum_cost;
  std::vector<UpdateEvent> updates;
  SuccessMetrics metrics;
  double final_pivot_angle = 0.0;

  int steps() const { return static_cast<int>(t.size()); }

  // columns: t, desired pose, compliant pose, raw force, measured force,
  // m/k/d per axis, cumulative cost
  void write_csv(std::ostream& os) const;
};

// Executes the scripted plan through the admittance loop against the
// environment, recording forces each step and (when enabled) re-optimizing
// the residual parameters every T_update seconds. Gains swap between control
// steps; an optimizer failure keeps the previous gains and the loop goes on.
EpisodeTrace run_episode(const TrajectoryPlan& plan, const EnvConfig& env_cfg,
                         const ParamVector& u_init, const ControlConfig& ctl,
                         unsigned long long seed);

}  // namespace admit
