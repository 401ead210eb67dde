#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "admit/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw admit::ConfigError("cannot open: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string fnv1a_hex(const std::string& text) {
  unsigned long long h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

admit::Scenario load_with_overrides(const std::string& config_path,
                                    long long seed, int episodes) {
  admit::Scenario sc = admit::load_scenario(config_path);
  if (seed >= 0) sc.seed = static_cast<unsigned long long>(seed);
  if (episodes > 0) sc.episodes = episodes;
  return sc;
}

void print_rows(const std::vector<admit::ResultRow>& rows) {
  for (const auto& r : rows) {
    std::cout << r.scenario_id << " [" << r.method << "] success "
              << r.success_count << "/" << r.total;
    if (r.time_mean)
      std::cout << "  time " << *r.time_mean << " +- " << *r.time_std << " s";
    else
      std::cout << "  time N/A";
    std::cout << "  maxF " << r.max_force_mean << " +- " << r.max_force_std
              << " N\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Admittance residual-learning experiment runner"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  long long seed = -1;
  int episodes = 0;

  auto add_common = [&](CLI::App* cmd, bool need_config = true) {
    if (need_config)
      cmd->add_option("--config", config_path, "scenario config (JSON)")
          ->required();
    cmd->add_option("--seed", seed, "override the scenario seed");
    cmd->add_option("--out-dir", out_dir, "output directory");
    cmd->add_option("--episodes", episodes, "override the episode count");
  };

  auto* offline = app.add_subcommand("offline", "offline gain search");
  add_common(offline);

  auto* run = app.add_subcommand("run", "run an experiment suite");
  add_common(run);

  auto* sweep = app.add_subcommand("sweep", "objective-weight ablation");
  add_common(sweep);
  std::vector<double> w_values{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  sweep->add_option("--w", w_values, "weight values to sweep");

  auto* forces = app.add_subcommand("forces", "force-model comparison");
  add_common(forces);

  auto* report = app.add_subcommand("report", "merge result tables");
  std::vector<std::string> inputs;
  report->add_option("inputs", inputs, "results.json files")->required();
  report->add_option("--out-dir", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (offline->parsed()) {
      admit::Scenario sc = load_with_overrides(config_path, seed, episodes);
      const auto res = admit::cem_gain_search(sc.gain_search, sc.sim);
      const auto gains = admit::recover_gains(res.u_init);
      fs::create_directories(out_dir);
      const std::string path = (fs::path(out_dir) / "gains.json").string();
      admit::save_gain_file(path, sc.task, gains, sc.seed,
                            fnv1a_hex(read_file(config_path)));
      std::cout << "learned gains -> " << path << "\n"
                << "  m: " << gains.m.transpose() << "\n"
                << "  k: " << gains.k.transpose() << "\n"
                << "  d: " << gains.d.transpose() << "\n"
                << "  score " << res.score << " (initial mean "
                << res.initial_score << ")\n";
      if (res.all_failed)
        std::cout << "warning: every candidate episode failed\n";
    } else if (run->parsed()) {
      admit::Scenario sc = load_with_overrides(config_path, seed, episodes);
      const auto suite = admit::run_suite(sc, out_dir);
      print_rows({suite.row});
    } else if (sweep->parsed()) {
      admit::Scenario sc = load_with_overrides(config_path, seed, episodes);
      const auto rows = admit::weight_sweep(sc, w_values, out_dir);
      print_rows(rows);
    } else if (forces->parsed()) {
      admit::Scenario sc = load_with_overrides(config_path, seed, episodes);
      const auto rep = admit::compare_force_models(sc, out_dir);
      for (const auto& m : rep.methods)
        std::cout << m.source << ": success=" << m.success
                  << " bounces_after_update=" << m.bounces_after_first_update
                  << " maxF=" << m.max_force << " N\n";
      std::cout << "linear fit MAE in-window " << rep.in_window_mae
                << " N, next-window " << rep.next_window_mae << " N\n";
    } else if (report->parsed()) {
      std::vector<admit::ResultRow> rows;
      for (const auto& in : inputs) {
        json j = json::parse(read_file(in));
        for (const auto& e : j) {
          admit::ResultRow r;
          r.method = e.at("method").get<std::string>();
          r.scenario_id = e.at("scenario").get<std::string>();
          r.success_count = e.at("success_count").get<int>();
          r.total = e.at("total").get<int>();
          if (!e.at("time_mean").is_null()) {
            r.time_mean = e.at("time_mean").get<double>();
            r.time_std = e.at("time_std").get<double>();
          }
          r.max_force_mean = e.at("max_force_mean").get<double>();
          r.max_force_std = e.at("max_force_std").get<double>();
          rows.push_back(r);
        }
      }
      fs::create_directories(out_dir);
      admit::write_results_json(rows, (fs::path(out_dir) / "report.json").string());
      admit::write_results_csv(rows, (fs::path(out_dir) / "report.csv").string());
      print_rows(rows);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
