#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "admit/experiment.hpp"

using namespace admit;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

const char* kMinimalConfig = R"({"schema_version": 1, "task": "wall"})";

Scenario small_wall_scenario(const std::string& method) {
  std::ostringstream js;
  js << R"({
    "schema_version": 1,
    "task": "wall",
    "method": ")" << method << R"(",
    "episodes": 2,
    "seed": 3,
    "sim":  {"k_env": 800, "d_env": 20},
    "real": {"k_env": 2400, "d_env": 20, "sensor_latency": 1},
    "gain_search": {"population": 4, "iterations": 2, "episode_seeds": 1,
                     "k_bounds": [400, 1200], "d_bounds": [10, 60]}
  })";
  return scenario_from_json_text(js.str(), "small_wall");
}

EpisodeTrace synthetic_trace(const std::vector<char>& contact,
                             const std::vector<double>& force) {
  EpisodeTrace tr;
  tr.dt = 0.01;
  const int n = static_cast<int>(contact.size());
  tr.contact = contact;
  tr.f_raw.setZero(n, 1);
  tr.f_meas.setZero(n, 1);
  tr.x_c.setZero(n, 1);
  tr.x_d.setZero(n, 1);
  for (int i = 0; i < n; ++i) {
    tr.t.push_back(i * tr.dt);
    tr.f_raw(i, 0) = force[i];
  }
  return tr;
}

}  // namespace

TEST_CASE("method tags round trip") {
  for (const char* tag : {"proposed", "manual_tune", "direct_transfer"})
    CHECK(method_name(parse_method(tag)) == tag);
  CHECK_THROWS_AS(parse_method("expert"), ConfigError);
}

TEST_CASE("scenario config parsing") {
  SUBCASE("minimal config fills documented defaults") {
    const Scenario sc = scenario_from_json_text(kMinimalConfig, "mini");
    CHECK(sc.id == "mini");
    CHECK(sc.task == Task::Wall1D);
    CHECK(sc.method == Method::Proposed);
    CHECK(sc.episodes == 10);
    CHECK(sc.seed == 0);
    CHECK(sc.weights.w == 0.4);
    CHECK(sc.T_update == 1.0);
    CHECK(sc.dt == 0.01);
    CHECK(sc.budget == 200);
    CHECK(sc.force_source == ForceSource::RecordReplay);
    CHECK(sc.gain_search.episode_seeds.size() == 3);
    CHECK_FALSE(sc.gain_file.has_value());
  }

  SUBCASE("offline episode seedset is derived from the scenario seed") {
    Scenario sc = scenario_from_json_text(
        R"({"schema_version": 1, "task": "wall", "seed": 5})", "s");
    for (size_t i = 0; i < sc.gain_search.episode_seeds.size(); ++i)
      CHECK(sc.gain_search.episode_seeds[i] == 5ull * 131071ull + 17ull * i + 1ull);
    CHECK(sc.gain_search.rng_seed == 5);
  }

  SUBCASE("schema_version is mandatory and pinned") {
    CHECK_THROWS_AS(scenario_from_json_text(R"({"task": "wall"})", "x"),
                    ConfigError);
    CHECK_THROWS_AS(
        scenario_from_json_text(R"({"schema_version": 2, "task": "wall"})", "x"),
        ConfigError);
  }

  SUBCASE("malformed inputs are reported as configuration errors") {
    CHECK_THROWS_AS(scenario_from_json_text("{not json", "x"), ConfigError);
    CHECK_THROWS_AS(
        scenario_from_json_text(R"({"schema_version": 1})", "x"),
        ConfigError);  // task missing
    CHECK_THROWS_AS(scenario_from_json_text(
                        R"({"schema_version": 1, "task": "drilling"})", "x"),
                    ConfigError);
    CHECK_THROWS_AS(
        scenario_from_json_text(
            R"({"schema_version": 1, "task": "wall", "method": "best"})", "x"),
        ConfigError);
    CHECK_THROWS_AS(
        scenario_from_json_text(
            R"({"schema_version": 1, "task": "wall",
                "gain_box": {"k": [100, 50]}})",
            "x"),
        ConfigError);  // inverted range
    CHECK_THROWS_AS(
        scenario_from_json_text(
            R"({"schema_version": 1, "task": "wall",
                "gain_box": {"k": [100]}})",
            "x"),
        ConfigError);  // not a [lower, upper] pair
    CHECK_THROWS_AS(
        scenario_from_json_text(
            R"({"schema_version": 1, "task": "wall",
                "gain_search": {"k_bounds": [10, 20, 30]}})",
            "x"),
        ConfigError);
    CHECK_THROWS_AS(
        scenario_from_json_text(
            R"({"schema_version": 1, "task": "wall", "episodes": 0})", "x"),
        ConfigError);
  }

  SUBCASE("loading from disk uses the file stem as fallback id") {
    const fs::path p = fs::temp_directory_path() / "scenario_stem_test.json";
    std::ofstream(p) << kMinimalConfig;
    const Scenario sc = load_scenario(p.string());
    CHECK(sc.id == "scenario_stem_test");
    fs::remove(p);
    CHECK_THROWS_AS(load_scenario("no_such_config.json"), ConfigError);
  }
}

TEST_CASE("trace metrics") {
  SUBCASE("separation events count contact-to-free transitions") {
    const auto tr = synthetic_trace({0, 1, 1, 0, 1, 0, 0, 1},
                                    {0, 2, 3, 0, 4, 0, 0, 5});
    CHECK(count_separation_events(tr) == 2);
    // from t = 0.04 the first drop is out of range
    CHECK(count_separation_events(tr, 0.04) == 1);
    // a trace that ends in contact has no trailing event
    CHECK(count_separation_events(tr, 0.07) == 0);
  }

  SUBCASE("peak force respects the time filter") {
    const auto tr = synthetic_trace({0, 1, 1, 0, 1, 0, 0, 1},
                                    {0, 9, 3, 0, 4, 0, 0, 5});
    CHECK(peak_force(tr) == 9.0);
    CHECK(peak_force(tr, 0.02) == 5.0);
  }

  SUBCASE("window generalization needs two full windows") {
    const auto tr = synthetic_trace(std::vector<char>(30, 1),
                                    std::vector<double>(30, 1.0));
    double a = 0, b = 0;
    CHECK_THROWS_AS(linear_fit_window_errors(tr, 20, &a, &b),
                    std::domain_error);
  }
}

TEST_CASE("episode execution") {
  const Scenario sc = small_wall_scenario("proposed");
  const ParamVector u0 = to_param_vector(
      load_baseline_gains("manual_tune", Task::Wall1D, 1));
  std::mt19937_64 pose_rng(42);
  const Vec start = randomize_initial_pose(Task::Wall1D, pose_rng);
  const TrajectoryPlan plan =
      scripted_trajectory(Task::Wall1D, sc.real.geometry, start, sc.dt);
  ControlConfig ctl;
  ctl.stop_on_success = false;

  SUBCASE("identical seeds give identical traces") {
    const EpisodeTrace a = run_episode(plan, sc.real, u0, ctl, 42);
    const EpisodeTrace b = run_episode(plan, sc.real, u0, ctl, 42);
    CHECK(a.steps() == b.steps());
    CHECK(a.x_c == b.x_c);
    CHECK(a.f_meas == b.f_meas);
    CHECK(a.gain_k == b.gain_k);
    CHECK(a.updates.size() == b.updates.size());
  }

  SUBCASE("an update period longer than the episode means fixed gains") {
    ControlConfig slow = ctl;
    slow.T_update = 2.0 * plan.duration();
    const EpisodeTrace tr = run_episode(plan, sc.real, u0, slow, 42);
    CHECK(tr.updates.empty());
    for (int i = 0; i < tr.steps(); ++i) {
      CHECK(tr.gain_k(i, 0) == 200.0);
      CHECK(tr.gain_m(i, 0) == 3.0);
      CHECK(tr.gain_d(i, 0) == 300.0);
    }
  }
}

TEST_CASE("suite runs are reproducible on disk") {
  const Scenario sc = small_wall_scenario("manual_tune");
  const fs::path base = fs::temp_directory_path() / "suite_repro_test";
  fs::remove_all(base);
  const auto a = run_suite(sc, (base / "a").string());
  const auto b = run_suite(sc, (base / "b").string());

  CHECK(a.row.total == 2);
  CHECK(read_file(base / "a" / "results.json") ==
        read_file(base / "b" / "results.json"));
  CHECK(read_file(base / "a" / "results.csv") ==
        read_file(base / "b" / "results.csv"));
  CHECK(read_file(base / "a" / "trace_ep0.csv") ==
        read_file(base / "b" / "trace_ep0.csv"));
  CHECK(fs::exists(base / "a" / "trace_ep1.csv"));
  fs::remove_all(base);
}

TEST_CASE("weight sweep rejects weights outside the unit interval") {
  const Scenario sc = small_wall_scenario("proposed");
  CHECK_THROWS_AS(weight_sweep(sc, {0.5, 1.5}), ConfigError);
  CHECK_THROWS_AS(weight_sweep(sc, {-0.1}), ConfigError);
}

TEST_CASE("result tables") {
  ResultRow ok;
  ok.method = "proposed";
  ok.scenario_id = "demo";
  ok.success_count = 9;
  ok.total = 10;
  ok.time_mean = 3.5;
  ok.time_std = 0.25;
  ok.max_force_mean = 12.0;
  ok.max_force_std = 1.5;
  ResultRow none;
  none.method = "manual_tune";
  none.scenario_id = "demo";
  none.total = 10;
  none.max_force_mean = 40.0;
  none.max_force_std = 2.0;

  const fs::path base = fs::temp_directory_path() / "result_table_test";
  fs::create_directories(base);
  write_results_csv({ok, none}, (base / "r.csv").string());
  write_results_json({ok, none}, (base / "r.json").string());

  const std::string csv = read_file(base / "r.csv");
  CHECK(csv.find("proposed,demo,9,10,3.5,0.25,12,1.5") != std::string::npos);
  // no successful trials: completion time is reported as unavailable
  CHECK(csv.find("manual_tune,demo,0,10,N/A,N/A,40,2") != std::string::npos);
  const std::string js = read_file(base / "r.json");
  CHECK(js.find("\"time_mean\": null") != std::string::npos);
  CHECK(js.find("\"time_basis\": \"simulated\"") != std::string::npos);
  fs::remove_all(base);
}
