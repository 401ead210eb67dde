#include "admit/controller.hpp"

#include <cmath>
#include <deque>
#include <iomanip>

namespace admit {

ForceSource parse_force_source(const std::string& tag) {
  if (tag == "record_replay") return ForceSource::RecordReplay;
  if (tag == "linear_fit") return ForceSource::LinearFit;
  throw ConfigError("unknown force source: " + tag);
}

void EpisodeTrace::write_csv(std::ostream& os) const {
  const long n = x_d.cols();
  os << "t";
  for (long i = 0; i < n; ++i) os << ",x_d" << i;
  for (long i = 0; i < n; ++i) os << ",x_c" << i;
  for (long i = 0; i < n; ++i) os << ",f_raw" << i;
  for (long i = 0; i < n; ++i) os << ",f_meas" << i;
  for (long i = 0; i < n; ++i) os << ",m" << i;
  for (long i = 0; i < n; ++i) os << ",k" << i;
  for (long i = 0; i < n; ++i) os << ",d" << i;
  os << ",cum_cost\n";
  os << std::setprecision(17);
  for (int r = 0; r < steps(); ++r) {
    os << t[r];
    for (long i = 0; i < n; ++i) os << "," << x_d(r, i);
    for (long i = 0; i < n; ++i) os << "," << x_c(r, i);
    for (long i = 0; i < n; ++i) os << "," << f_raw(r, i);
    for (long i = 0; i < n; ++i) os << "," << f_meas(r, i);
    for (long i = 0; i < n; ++i) os << "," << gain_m(r, i);
    for (long i = 0; i < n; ++i) os << "," << gain_k(r, i);
    for (long i = 0; i < n; ++i) os << "," << gain_d(r, i);
    os << "," << cum_cost[r] << "\n";
  }
}

EpisodeTrace run_episode(const TrajectoryPlan& plan, const EnvConfig& env_cfg,
                         const ParamVector& u_init, const ControlConfig& ctl,
                         unsigned long long seed) {
  env_cfg.validate();
  u_init.validate();
  ctl.weights.validate();
  if (plan.dt != ctl.dt)
    throw ConfigError("run_episode: plan dt and control dt differ");
  if (plan.samples.axes() != env_cfg.axes() ||
      u_init.axes() != env_cfg.axes())
    throw ShapeError("run_episode: axis count mismatch");

  const int steps = plan.steps();
  const int n = env_cfg.axes();
  const double dt = ctl.dt;
  const int update_steps =
      std::max(1, static_cast<int>(std::round(ctl.T_update / dt)));

  std::mt19937_64 rng(seed ^ env_cfg.seed);

  EpisodeTrace tr;
  tr.dt = dt;
  tr.x_d.resize(steps, n);
  tr.x_c.resize(steps, n);
  tr.f_raw.resize(steps, n);
  tr.f_meas.resize(steps, n);
  tr.gain_m.resize(steps, n);
  tr.gain_k.resize(steps, n);
  tr.gain_d.resize(steps, n);

  ParamVector u = u_init;
  AdmittanceParams gains = recover_gains(u);
  ErrorState x = ErrorState::zero(n);
  ErrorState window_start_state = x;
  int window_start_step = 0;

  ForceWindow window(static_cast<size_t>(update_steps), dt);
  EnvState env = EnvState::initial(env_cfg, plan.samples.pos.row(0).transpose());
  std::deque<Vec> latency_line;

  // compliant pose/velocity history for the linear-fit force source
  Eigen::MatrixXd xc_hist(steps, n), vc_hist(steps, n);

  double cum = 0.0;
  int taken = 0;
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    const Vec x_d = plan.samples.pos.row(k).transpose();
    const Vec v_d = plan.samples.vel.row(k).transpose();
    const Vec x_c = x_d + x.e;
    const Vec v_c = v_d + x.e_dot;

    const Vec f_raw = env_step(env, env_cfg, x_c, v_c, dt);

    Vec f_delayed = f_raw;
    if (env_cfg.sensor_latency > 0) {
      latency_line.push_back(f_raw);
      if (static_cast<int>(latency_line.size()) > env_cfg.sensor_latency) {
        f_delayed = latency_line.front();
        latency_line.pop_front();
      } else {
        f_delayed = Vec::Zero(n);
      }
    }
    const Vec f_meas = sensor_read(f_delayed, env_cfg, rng);
    window.record(t, f_meas);

    tr.t.push_back(t);
    tr.x_d.row(k) = x_d.transpose();
    tr.x_c.row(k) = x_c.transpose();
    tr.f_raw.row(k) = f_raw.transpose();
    tr.f_meas.row(k) = f_meas.transpose();
    tr.gain_m.row(k) = gains.m.transpose();
    tr.gain_k.row(k) = gains.k.transpose();
    tr.gain_d.row(k) = gains.d.transpose();
    tr.contact.push_back(env.in_contact ? 1 : 0);
    xc_hist.row(k) = x_c.transpose();
    vc_hist.row(k) = v_c.transpose();

    cum += t * (ctl.weights.w * x.e.cwiseAbs().sum() +
                (1.0 - ctl.weights.w) * x.e_dot.cwiseAbs().sum()) * dt;
    tr.cum_cost.push_back(cum);

    tr.metrics.max_force = std::max(tr.metrics.max_force, f_raw.norm());
    taken = k + 1;

    if (!tr.metrics.success && success_check(env_cfg.task, env, env_cfg.geometry)) {
      tr.metrics.success = true;
      tr.metrics.completion_time = t;
      if (ctl.stop_on_success) break;
    }

    x = step_error_dynamics(x, f_meas, u, dt);

    if (ctl.adapt && (k + 1) % update_steps == 0 && k + 1 < steps) {
      UpdateEvent ev;
      ev.t = (k + 1) * dt;
      try {
        OptResult r;
        if (ctl.force_source == ForceSource::RecordReplay) {
          OptProblem prob{u,           window_start_state, window.snapshot(),
                          dt,          ctl.weights,        ctl.box,
                          ctl.eps,     ctl.budget,         ctl.trust_radius};
          r = optimize_residual(prob);
        } else {
          const int w = static_cast<int>(window.size());
          Eigen::MatrixXd xs = xc_hist.middleRows(window_start_step, w);
          Eigen::MatrixXd vs = vc_hist.middleRows(window_start_step, w);
          const LinearForceModel model = fit_linear_force(window, xs, vs);
          const Vec u0 = u.flat();
          auto cost = [&](const Vec& du) {
            const Vec uf = u0 + du;
            if ((uf.array() < ctl.eps - 1e-15).any())
              throw ConstraintError("linear-fit rollout: infeasible candidate");
            const ParamVector cand = ParamVector::from_flat(uf);
            std::vector<ErrorState> states;
            states.push_back(window_start_state);
            ErrorState st = window_start_state;
            for (int i = 0; i < w; ++i) {
              const Vec pos =
                  plan.samples.pos.row(window_start_step + i).transpose() + st.e;
              const Vec vel =
                  plan.samples.vel.row(window_start_step + i).transpose() +
                  st.e_dot;
              const Vec f = predict_linear_force(model, pos, vel);
              st = step_error_dynamics(st, f, cand, dt);
              states.push_back(st);
            }
            return trajectory_cost(states, dt, ctl.weights);
          };
          r = optimize_local(cost, u, ctl.box, ctl.budget, ctl.trust_radius);
        }
        ev.cost_before = r.cost_before;
        ev.cost_after = r.cost_after;
        ev.delta_u = r.delta_u;
        ev.evaluations = r.evaluations;
        u = ParamVector::from_flat(u.flat() + r.delta_u);
        gains = recover_gains(u);
      } catch (const std::exception&) {
        ev.applied = false;  // keep previous gains, continue
      }
      tr.updates.push_back(ev);
      window_start_state = x;
      window_start_step = k + 1;
    }
  }

  tr.x_d.conservativeResize(taken, n);
  tr.x_c.conservativeResize(taken, n);
  tr.f_raw.conservativeResize(taken, n);
  tr.f_meas.conservativeResize(taken, n);
  tr.gain_m.conservativeResize(taken, n);
  tr.gain_k.conservativeResize(taken, n);
  tr.gain_d.conservativeResize(taken, n);
  tr.final_pivot_angle = env.pivot_angle;
  return tr;
}

}  // namespace admit
