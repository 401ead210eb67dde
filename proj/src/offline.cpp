#include "admit/offline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

namespace admit {

using nlohmann::json;

int GainSearchConfig::elite_count() const {
  return std::max(1, static_cast<int>(std::floor(elite_frac * population)));
}

void GainSearchConfig::validate() const {
  if (population < 1 || elite_count() > population)
    throw ConfigError("GainSearchConfig: population must cover the elites");
  if (iterations < 1) throw ConfigError("GainSearchConfig: iterations >= 1");
  const long n = m_fixed.size();
  if (k_lower.size() != n || k_upper.size() != n || d_lower.size() != n ||
      d_upper.size() != n)
    throw ConfigError("GainSearchConfig: bound length mismatch");
  if ((k_lower.array() <= 0).any() || (d_lower.array() <= 0).any() ||
      (m_fixed.array() <= 0).any())
    throw ConfigError("GainSearchConfig: bounds must be positive");
  if ((k_upper.array() < k_lower.array()).any() ||
      (d_upper.array() < d_lower.array()).any())
    throw ConfigError("GainSearchConfig: upper bound below lower bound");
  if (episode_seeds.empty())
    throw ConfigError("GainSearchConfig: empty episode seedset");
}

namespace {

double episode_score(const EpisodeTrace& tr, const TrajectoryPlan& plan,
                     Task task, const GainSearchConfig& cfg) {
  double reward = 0.0;
  if (task == Task::Pivot2D) {
    reward = pivot_reward_planar(tr.final_pivot_angle, M_PI / 2);
  } else {
    // mean per-step goal-distance reward; the goal is the plan's final pose
    const Vec goal = plan.samples.pos.row(plan.steps() - 1).transpose();
    double acc = 0.0;
    for (int i = 0; i < tr.steps(); ++i)
      acc += assembly_reward(tr.x_c.row(i).transpose(), goal, cfg.reward_scale);
    // episodes that finish early keep earning the terminal reward
    if (tr.steps() > 0 && tr.steps() < plan.steps())
      acc += assembly_reward(tr.x_c.row(tr.steps() - 1).transpose(), goal,
                             cfg.reward_scale) *
             (plan.steps() - tr.steps());
    reward = acc / plan.steps();
  }
  return reward - cfg.force_penalty * tr.metrics.max_force;
}

}  // namespace

double evaluate_gains(const AdmittanceParams& p, const EnvConfig& env_cfg,
                      const GainSearchConfig& cfg) {
  const ParamVector u = to_param_vector(p);
  ControlConfig ctl;
  ctl.adapt = false;
  double total = 0.0;
  for (const auto seed : cfg.episode_seeds) {
    std::mt19937_64 pose_rng(seed);
    const Vec start = randomize_initial_pose(env_cfg.task, pose_rng);
    const TrajectoryPlan plan =
        scripted_trajectory(env_cfg.task, env_cfg.geometry, start, ctl.dt);
    const EpisodeTrace tr = run_episode(plan, env_cfg, u, ctl, seed);
    total += episode_score(tr, plan, env_cfg.task, cfg);
  }
  return total / static_cast<double>(cfg.episode_seeds.size());
}

GainSearchResult cem_gain_search(const GainSearchConfig& cfg,
                                 const EnvConfig& env_cfg) {
  cfg.validate();
  env_cfg.validate();
  const long n = cfg.m_fixed.size();
  const long dim = 2 * n;  // [log k; log d]

  Vec lo(dim), hi(dim);
  lo << cfg.k_lower.array().log().matrix(), cfg.d_lower.array().log().matrix();
  hi << cfg.k_upper.array().log().matrix(), cfg.d_upper.array().log().matrix();

  Vec mean = 0.5 * (lo + hi);
  Vec sigma = (hi - lo) / 4.0;

  auto make_params = [&](const Vec& v) {
    const Vec k = v.segment(0, n).array().exp();
    const Vec d = v.segment(n, n).array().exp();
    return AdmittanceParams(cfg.m_fixed, k, d);
  };
  auto score_of = [&](const Vec& v) -> double {
    try {
      return evaluate_gains(make_params(v), env_cfg, cfg);
    } catch (const std::exception&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  GainSearchResult res;
  res.initial_score = score_of(mean);
  double best_score = res.initial_score;
  Vec best_v = mean;
  bool any_finite = std::isfinite(res.initial_score);

  std::mt19937_64 rng(cfg.rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (int it = 0; it < cfg.iterations; ++it) {
    std::vector<Vec> pop(cfg.population);
    std::vector<double> scores(cfg.population);
    for (int i = 0; i < cfg.population; ++i) {
      Vec v(dim);
      for (long j = 0; j < dim; ++j) {
        const double noise = sigma[j] > 0 ? sigma[j] * gauss(rng) : 0.0;
        v[j] = std::clamp(mean[j] + noise, lo[j], hi[j]);
      }
      pop[i] = v;
      scores[i] = score_of(v);
      if (std::isfinite(scores[i])) any_finite = true;
      if (scores[i] > best_score) {
        best_score = scores[i];
        best_v = v;
      }
    }
    std::vector<int> order(cfg.population);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });
    const int ne = cfg.elite_count();
    Vec new_mean = Vec::Zero(dim);
    double elite_sum = 0.0;
    for (int e = 0; e < ne; ++e) {
      new_mean += pop[order[e]];
      elite_sum += scores[order[e]];
    }
    new_mean /= ne;
    Vec var = Vec::Zero(dim);
    for (int e = 0; e < ne; ++e) {
      const Vec d = pop[order[e]] - new_mean;
      var += d.cwiseProduct(d);
    }
    sigma = (var / ne).cwiseSqrt().cwiseMax(0.01);
    if ((hi - lo).maxCoeff() == 0.0) sigma.setZero();  // singleton space
    mean = new_mean;
    res.elite_mean_history.push_back(elite_sum / ne);
  }

  // elitism: never return something worse than the best candidate seen
  const double mean_score = score_of(mean);
  if (std::isfinite(mean_score) && mean_score >= best_score) {
    best_score = mean_score;
    best_v = mean;
  }
  res.all_failed = !any_finite;
  res.score = best_score;
  res.u_init = to_param_vector(make_params(best_v));
  return res;
}

AdmittanceParams load_baseline_gains(const std::string& name, Task task,
                                     int axes,
                                     const std::optional<ParamVector>& learned) {
  if (name == "direct_transfer") {
    if (!learned)
      throw ConfigError("direct_transfer baseline requires learned gains");
    return recover_gains(*learned);
  }
  if (name != "manual_tune")
    throw ConfigError("unknown baseline gain set: " + name);

  double m, k, d;
  if (task == Task::Pivot2D) {
    m = 4.0; k = 300.0; d = 300.0;
  } else {
    m = 3.0; k = 200.0; d = 300.0;
  }
  if (axes == 6) {
    Vec mv(6), kv(6), dv(6);
    const double mi = 2.0;
    const double kr = 200.0, dr = 250.0;
    mv << m, m, m, mi, mi, mi;
    kv << k, k, k, kr, kr, kr;
    dv << d, d, d, dr, dr, dr;
    return AdmittanceParams(mv, kv, dv);
  }
  return AdmittanceParams(Vec::Constant(axes, m), Vec::Constant(axes, k),
                          Vec::Constant(axes, d));
}

void save_gain_file(const std::string& path, Task task,
                    const AdmittanceParams& p, unsigned long long seed,
                    const std::string& config_hash) {
  json j;
  j["task"] = task_name(task);
  std::vector<std::string> labels;
  if (p.axes() == 1) labels = {"z"};
  else if (p.axes() == 2) labels = {"x", "z"};
  else labels = {"x", "y", "z", "rx", "ry", "rz"};
  labels.resize(static_cast<size_t>(p.axes()), "?");
  j["axis_labels"] = labels;
  j["m"] = std::vector<double>(p.m.data(), p.m.data() + p.m.size());
  j["k"] = std::vector<double>(p.k.data(), p.k.data() + p.k.size());
  j["d"] = std::vector<double>(p.d.data(), p.d.data() + p.d.size());
  j["provenance"] = {{"seed", seed}, {"config_hash", config_hash}};
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write gain file: " + path);
  os << j.dump(2) << "\n";
}

AdmittanceParams load_gain_file(const std::string& path, Task* task) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read gain file: " + path);
  json j;
  is >> j;
  if (task) *task = parse_task(j.at("task").get<std::string>());
  auto vec = [&](const char* key) {
    const auto v = j.at(key).get<std::vector<double>>();
    return Eigen::Map<const Vec>(v.data(), static_cast<long>(v.size())).eval();
  };
  return AdmittanceParams(vec("m"), vec("k"), vec("d"));
}

}  // namespace admit
