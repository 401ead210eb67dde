#include "admit/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace admit {

namespace fs = std::filesystem;
using nlohmann::json;

Method parse_method(const std::string& tag) {
  if (tag == "proposed") return Method::Proposed;
  if (tag == "manual_tune") return Method::ManualTune;
  if (tag == "direct_transfer") return Method::DirectTransfer;
  throw ConfigError("unknown method: " + tag);
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Proposed: return "proposed";
    case Method::ManualTune: return "manual_tune";
    case Method::DirectTransfer: return "direct_transfer";
  }
  return "?";
}

void Scenario::validate() const {
  sim.validate();
  real.validate();
  weights.validate();
  if (episodes < 1) throw ConfigError("Scenario: episodes must be >= 1");
  if (T_update <= 0) throw ConfigError("Scenario: T_update must be > 0");
  if (dt <= 0) throw ConfigError("Scenario: dt must be > 0");
}

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (j.contains(key)) return j.at(key).get<T>();
  return fallback;
}

Geometry parse_geometry(const json& j, Geometry base) {
  base.hole_half_width = get_or(j, "hole_half_width", base.hole_half_width);
  base.hole_depth = get_or(j, "hole_depth", base.hole_depth);
  base.peg_length = get_or(j, "peg_length", base.peg_length);
  base.chamfer_width = get_or(j, "chamfer_width", base.chamfer_width);
  base.chamfer_depth = get_or(j, "chamfer_depth", base.chamfer_depth);
  base.hole_offset = get_or(j, "hole_offset", base.hole_offset);
  base.object_length = get_or(j, "object_length", base.object_length);
  base.object_thickness = get_or(j, "object_thickness", base.object_thickness);
  base.object_mass = get_or(j, "object_mass", base.object_mass);
  base.pivot_damping = get_or(j, "pivot_damping", base.pivot_damping);
  return base;
}

EnvConfig parse_env(const json& j, Task task) {
  EnvConfig cfg;
  cfg.task = task;
  cfg.k_env = get_or(j, "k_env", cfg.k_env);
  cfg.d_env = get_or(j, "d_env", cfg.d_env);
  cfg.mu = get_or(j, "mu", cfg.mu);
  cfg.noise_sigma = get_or(j, "noise_sigma", cfg.noise_sigma);
  cfg.force_clip = get_or(j, "force_clip", cfg.force_clip);
  cfg.sensor_latency = get_or(j, "sensor_latency", cfg.sensor_latency);
  cfg.seed = get_or(j, "seed", cfg.seed);
  if (j.contains("geometry")) cfg.geometry = parse_geometry(j.at("geometry"), cfg.geometry);
  cfg.validate();
  return cfg;
}

Vec parse_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<long>(v.size()));
}

GainSearchConfig parse_gain_search(const json& j, int axes,
                                   unsigned long long seed) {
  GainSearchConfig g;
  g.population = get_or(j, "population", 24);
  g.elite_frac = get_or(j, "elite_frac", 0.25);
  g.iterations = get_or(j, "iterations", 8);
  const auto kb = j.contains("k_bounds")
                      ? j.at("k_bounds").get<std::vector<double>>()
                      : std::vector<double>{10.0, 5000.0};
  const auto db = j.contains("d_bounds")
                      ? j.at("d_bounds").get<std::vector<double>>()
                      : std::vector<double>{5.0, 500.0};
  if (kb.size() != 2 || db.size() != 2)
    throw ConfigError("gain_search: bounds must be [lower, upper]");
  g.k_lower = Vec::Constant(axes, kb[0]);
  g.k_upper = Vec::Constant(axes, kb[1]);
  g.d_lower = Vec::Constant(axes, db[0]);
  g.d_upper = Vec::Constant(axes, db[1]);
  g.m_fixed = j.contains("m") ? parse_vec(j.at("m")) : Vec::Ones(axes);
  const int n_seeds = get_or(j, "episode_seeds", 3);
  for (int i = 0; i < n_seeds; ++i)
    g.episode_seeds.push_back(seed * 131071ull + 17ull * i + 1ull);
  g.force_penalty = get_or(j, "force_penalty", 0.01);
  g.reward_scale = get_or(j, "reward_scale", 100.0);
  g.rng_seed = get_or(j, "rng_seed", seed);
  return g;
}

Scenario parse_scenario(const json& j, const std::string& id) {
  if (!j.contains("schema_version") || j.at("schema_version").get<int>() != 1)
    throw ConfigError("scenario config: missing or unsupported schema_version (want 1)");
  Scenario sc;
  sc.id = get_or<std::string>(j, "id", id);
  sc.task = parse_task(j.at("task").get<std::string>());
  sc.method = parse_method(get_or<std::string>(j, "method", "proposed"));
  sc.seed = get_or<unsigned long long>(j, "seed", 0);
  sc.episodes = get_or(j, "episodes", 10);
  sc.weights.w = get_or(j, "w", 0.4);
  sc.weights.horizon_T = get_or(j, "horizon_T", 1.0);
  sc.T_update = get_or(j, "T_update", 1.0);
  sc.dt = get_or(j, "dt", 0.01);
  sc.eps = get_or(j, "eps", 1e-3);
  if (j.contains("gain_box")) {
    const json& b = j.at("gain_box");
    auto range = [&](const char* key, double& lo, double& hi) {
      if (!b.contains(key)) return;
      const auto v = b.at(key).get<std::vector<double>>();
      if (v.size() != 2) throw ConfigError("gain_box: ranges must be [lower, upper]");
      lo = v[0];
      hi = v[1];
    };
    range("m", sc.box.m_min, sc.box.m_max);
    range("k", sc.box.k_min, sc.box.k_max);
    range("d", sc.box.d_min, sc.box.d_max);
    sc.box.validate();
  }
  sc.budget = get_or(j, "budget", 200);
  sc.force_source =
      parse_force_source(get_or<std::string>(j, "force_source", "record_replay"));
  sc.sim = parse_env(j.contains("sim") ? j.at("sim") : json::object(), sc.task);
  sc.real = parse_env(j.contains("real") ? j.at("real") : json::object(), sc.task);
  sc.gain_search = parse_gain_search(
      j.contains("gain_search") ? j.at("gain_search") : json::object(),
      sc.sim.axes(), sc.seed);
  if (j.contains("gain_file") && !j.at("gain_file").is_null())
    sc.gain_file = j.at("gain_file").get<std::string>();
  sc.validate();
  return sc;
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text,
                                 const std::string& id) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario config parse error: ") + e.what());
  }
  try {
    return parse_scenario(j, id);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario config: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open scenario config: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return scenario_from_json_text(ss.str(), fs::path(path).stem().string());
}

ParamVector offline_gains_for(const Scenario& sc) {
  if (sc.method == Method::ManualTune)
    return to_param_vector(
        load_baseline_gains("manual_tune", sc.task, sc.sim.axes()));
  if (sc.gain_file) return to_param_vector(load_gain_file(*sc.gain_file));
  return cem_gain_search(sc.gain_search, sc.sim).u_init;
}

namespace {

void accumulate_stats(ResultRow& row, const std::vector<double>& times,
                      const std::vector<double>& forces) {
  auto mean_std = [](const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var = v.size() > 1 ? var / (n - 1.0) : 0.0;
    return std::pair<double, double>(mean, std::sqrt(var));
  };
  if (!times.empty()) {
    auto [tm, ts] = mean_std(times);
    row.time_mean = tm;
    row.time_std = ts;
  }
  if (!forces.empty()) {
    auto [fm, fsd] = mean_std(forces);
    row.max_force_mean = fm;
    row.max_force_std = fsd;
  }
}

}  // namespace

SuiteResult run_suite(const Scenario& sc, const std::string& out_dir) {
  sc.validate();
  SuiteResult suite;
  suite.u_init = offline_gains_for(sc);

  ControlConfig ctl;
  ctl.dt = sc.dt;
  ctl.T_update = sc.T_update;
  ctl.weights = sc.weights;
  ctl.eps = sc.eps;
  ctl.box = sc.box;
  ctl.budget = sc.budget;
  ctl.adapt = sc.method == Method::Proposed;
  ctl.force_source = sc.force_source;

  ResultRow row;
  row.method = method_name(sc.method);
  row.scenario_id = sc.id;
  row.total = sc.episodes;

  std::vector<double> times, forces;
  for (int i = 0; i < sc.episodes; ++i) {
    const unsigned long long ep_seed = sc.seed + 1000003ull * (i + 1);
    try {
      std::mt19937_64 pose_rng(ep_seed);
      const Vec start = randomize_initial_pose(sc.task, pose_rng);
      // the plan is built from the believed (sim) geometry; the real
      // environment may disagree
      const TrajectoryPlan plan =
          scripted_trajectory(sc.task, sc.sim.geometry, start, sc.dt);
      EpisodeTrace tr = run_episode(plan, sc.real, suite.u_init, ctl, ep_seed);
      if (tr.metrics.success) {
        ++row.success_count;
        times.push_back(*tr.metrics.completion_time);
      }
      forces.push_back(tr.metrics.max_force);
      suite.traces.push_back(std::move(tr));
    } catch (const std::exception&) {
      // a crashed episode counts as a failure and the suite continues
      suite.traces.emplace_back();
    }
  }
  accumulate_stats(row, times, forces);
  suite.row = row;

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_results_json({row}, (fs::path(out_dir) / "results.json").string());
    write_results_csv({row}, (fs::path(out_dir) / "results.csv").string());
    for (size_t i = 0; i < suite.traces.size(); ++i) {
      std::ostringstream name;
      name << "trace_ep" << i << ".csv";
      std::ofstream os(fs::path(out_dir) / name.str());
      suite.traces[i].write_csv(os);
    }
  }
  return suite;
}

std::vector<ResultRow> weight_sweep(const Scenario& sc,
                                    const std::vector<double>& w_values,
                                    const std::string& out_dir) {
  std::vector<ResultRow> rows;
  for (double w : w_values) {
    if (w < 0 || w > 1) throw ConfigError("weight_sweep: w must be in [0,1]");
    Scenario s = sc;
    s.method = Method::Proposed;
    s.weights.w = w;
    std::ostringstream id;
    id << sc.id << "_w" << w;
    s.id = id.str();
    rows.push_back(run_suite(s).row);
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_results_json(rows, (fs::path(out_dir) / "sweep.json").string());
    write_results_csv(rows, (fs::path(out_dir) / "sweep.csv").string());
  }
  return rows;
}

int count_separation_events(const EpisodeTrace& tr, double t_from) {
  int events = 0;
  bool seen_contact = false;
  for (int i = 0; i < tr.steps(); ++i) {
    if (tr.t[i] < t_from) continue;
    if (tr.contact[i]) {
      seen_contact = true;
    } else if (seen_contact) {
      ++events;
      seen_contact = false;
    }
  }
  return events;
}

double peak_force(const EpisodeTrace& tr, double t_from) {
  double peak = 0.0;
  for (int i = 0; i < tr.steps(); ++i) {
    if (tr.t[i] < t_from) continue;
    peak = std::max(peak, tr.f_raw.row(i).norm());
  }
  return peak;
}

void linear_fit_window_errors(const EpisodeTrace& tr, int window_steps,
                              double* in_window_mae, double* next_window_mae) {
  const int n_windows = tr.steps() / window_steps;
  if (n_windows < 2)
    throw std::domain_error("linear_fit_window_errors: need >= 2 full windows");
  const long n = tr.f_meas.cols();
  const double dt = tr.dt;

  double in_sum = 0.0, next_sum = 0.0;
  long in_cnt = 0, next_cnt = 0;
  // Fit on the first full window — the model the adaptation loop would hold at
  // its first decision point — and test how it extrapolates one window ahead.
  {
    const int wdx = 0;
    const int a = wdx * window_steps;
    ForceWindow win(static_cast<size_t>(window_steps), dt);
    Eigen::MatrixXd xs(window_steps, n), vs(window_steps, n);
    for (int i = 0; i < window_steps; ++i) {
      win.record(tr.t[a + i], tr.f_meas.row(a + i).transpose());
      xs.row(i) = tr.x_c.row(a + i);
      const int prev = std::max(0, a + i - 1);
      vs.row(i) = (tr.x_c.row(a + i) - tr.x_c.row(prev)) / dt;
    }
    const LinearForceModel model = fit_linear_force(win, xs, vs);

    for (int i = 0; i < window_steps; ++i) {
      const Vec pred =
          predict_linear_force(model, xs.row(i).transpose(), vs.row(i).transpose());
      in_sum += (pred - tr.f_meas.row(a + i).transpose()).cwiseAbs().sum();
      in_cnt += n;
    }
    // peak-force region of the following window: samples at >= half its max
    const int b = a + window_steps;
    double fmax = 0.0;
    for (int i = 0; i < window_steps; ++i)
      fmax = std::max(fmax, tr.f_meas.row(b + i).norm());
    for (int i = 0; i < window_steps; ++i) {
      if (tr.f_meas.row(b + i).norm() < 0.5 * fmax) continue;
      const Vec x = tr.x_c.row(b + i).transpose();
      const Vec v = (tr.x_c.row(b + i) - tr.x_c.row(b + i - 1)).transpose() / dt;
      const Vec pred = predict_linear_force(model, x, v);
      next_sum += (pred - tr.f_meas.row(b + i).transpose()).cwiseAbs().sum();
      next_cnt += n;
    }
  }
  *in_window_mae = in_cnt ? in_sum / static_cast<double>(in_cnt) : 0.0;
  *next_window_mae = next_cnt ? next_sum / static_cast<double>(next_cnt) : 0.0;
}

ForceModelReport compare_force_models(const Scenario& sc,
                                      const std::string& out_dir) {
  ForceModelReport rep;
  const ParamVector u0 = offline_gains_for(sc);
  const unsigned long long ep_seed = sc.seed + 1000003ull;
  std::mt19937_64 pose_rng(ep_seed);
  const Vec start = randomize_initial_pose(sc.task, pose_rng);
  const TrajectoryPlan plan =
      scripted_trajectory(sc.task, sc.sim.geometry, start, sc.dt);

  ControlConfig ctl;
  ctl.dt = sc.dt;
  ctl.T_update = sc.T_update;
  ctl.weights = sc.weights;
  ctl.eps = sc.eps;
  ctl.box = sc.box;
  ctl.budget = sc.budget;

  for (ForceSource src : {ForceSource::RecordReplay, ForceSource::LinearFit}) {
    ctl.adapt = true;
    ctl.force_source = src;
    const EpisodeTrace tr = run_episode(plan, sc.real, u0, ctl, ep_seed);
    ForceModelReport::PerSource p;
    p.source = src == ForceSource::RecordReplay ? "record_replay" : "linear_fit";
    p.success = tr.metrics.success;
    p.bounces_after_first_update = count_separation_events(tr, sc.T_update);
    p.max_force = tr.metrics.max_force;
    rep.methods.push_back(p);
  }

  ctl.adapt = false;
  ctl.stop_on_success = false;
  const EpisodeTrace fixed = run_episode(plan, sc.real, u0, ctl, ep_seed);
  const int wsteps = static_cast<int>(std::round(sc.T_update / sc.dt));
  linear_fit_window_errors(fixed, wsteps, &rep.in_window_mae,
                           &rep.next_window_mae);

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    json j;
    for (const auto& p : rep.methods)
      j["methods"].push_back({{"source", p.source},
                              {"success", p.success},
                              {"bounces_after_first_update",
                               p.bounces_after_first_update},
                              {"max_force", p.max_force}});
    j["in_window_mae"] = rep.in_window_mae;
    j["next_window_mae"] = rep.next_window_mae;
    std::ofstream os(fs::path(out_dir) / "forces_report.json");
    os << j.dump(2) << "\n";
  }
  return rep;
}

namespace {

json row_to_json(const ResultRow& r) {
  json j;
  j["method"] = r.method;
  j["scenario"] = r.scenario_id;
  j["success_count"] = r.success_count;
  j["total"] = r.total;
  if (r.time_mean) {
    j["time_mean"] = *r.time_mean;
    j["time_std"] = *r.time_std;
  } else {
    j["time_mean"] = nullptr;  // no successful trials, mirrors N/A
    j["time_std"] = nullptr;
  }
  j["max_force_mean"] = r.max_force_mean;
  j["max_force_std"] = r.max_force_std;
  j["time_basis"] = "simulated";
  return j;
}

}  // namespace

void write_results_json(const std::vector<ResultRow>& rows,
                        const std::string& path) {
  json j = json::array();
  for (const auto& r : rows) j.push_back(row_to_json(r));
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  os << j.dump(2) << "\n";
}

void write_results_csv(const std::vector<ResultRow>& rows,
                       const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  os << "method,scenario,success_count,total,time_mean,time_std,"
        "max_force_mean,max_force_std\n";
  os.precision(17);
  for (const auto& r : rows) {
    os << r.method << "," << r.scenario_id << "," << r.success_count << ","
       << r.total << ",";
    if (r.time_mean)
      os << *r.time_mean << "," << *r.time_std;
    else
      os << "N/A,N/A";
    os << "," << r.max_force_mean << "," << r.max_force_std << "\n";
  }
}

}  // namespace admit
