#pragma once

#include <optional>
#include <string>
#include <vector>

#include "admit/controller.hpp"
#include "admit/offline.hpp"

namespace admit {

enum class Method { Proposed, ManualTune, DirectTransfer };

Method parse_method(const std::string& tag);
std::string method_name(Method m);

/// One experiment suite: a task, a nominal "sim" environment for the offline
/// phase, a perturbed "real" environment for evaluation, and a method.
struct Scenario {
  std::string id;
  Task task = Task::Wall1D;
  Method method = Method::Proposed;
  EnvConfig sim;
  EnvConfig real;
  GainSearchConfig gain_search;
  CostWeights weights;
  double T_update = 1.0;
  double dt = 0.01;
  double eps = 1e-3;
  GainBox box;
  int budget = 200;
  int episodes = 10;
  unsigned long long seed = 0;
  ForceSource force_source = ForceSource::RecordReplay;
  std::optional<std::string> gain_file;  // reuse a saved offline result

  void validate() const;
};

Scenario load_scenario(const std::string& path);
Scenario scenario_from_json_text(const std::string& text,
                                 const std::string& id);

struct ResultRow {
  std::string method;
  std::string scenario_id;
  int success_count = 0;
  int total = 0;
  std::optional<double> time_mean, time_std;  // successful trials only
  double max_force_mean = 0.0, max_force_std = 0.0;
};

struct SuiteResult {
  ResultRow row;
  ParamVector u_init;                 // gains the episodes started from
  std::vector<EpisodeTrace> traces;   // by episode index
};

// Offline gains for the scenario's method: CEM in the "sim" environment for
// proposed/direct_transfer (or a saved gain file), the hand-tuned table for
// manual_tune.
ParamVector offline_gains_for(const Scenario& sc);

// Runs `episodes` seeded episodes in the "real" environment. When out_dir is
// nonempty, writes results.json, results.csv and one trace CSV per episode.
SuiteResult run_suite(const Scenario& sc, const std::string& out_dir = "");

// Re-runs the suite as the proposed method once per weight value.
std::vector<ResultRow> weight_sweep(const Scenario& sc,
                                    const std::vector<double>& w_values,
                                    const std::string& out_dir = "");

struct ForceModelReport {
  struct PerSource {
    std::string source;
    bool success = false;
    int bounces_after_first_update = 0;
    double max_force = 0.0;
  };
  std::vector<PerSource> methods;
  // linear-model generalization on the fixed-gain bounce trace
  double in_window_mae = 0.0;
  double next_window_mae = 0.0;
};

// Runs adaptation with record&replay and with the fitted linear force model
// on the scenario, and measures how the linear fit extrapolates across
// windows on the fixed-gain trace.
ForceModelReport compare_force_models(const Scenario& sc,
                                      const std::string& out_dir = "");

// Contact -> separation transitions after the first contact at or after
// t_from.
int count_separation_events(const EpisodeTrace& tr, double t_from = 0.0);
double peak_force(const EpisodeTrace& tr, double t_from = 0.0);

// Linear-fit generalization across adaptation windows: fit on the first full
// window (the model available at the first update), report its in-window MAE
// and its MAE on the following window's peak-force region.
void linear_fit_window_errors(const EpisodeTrace& tr, int window_steps,
                              double* in_window_mae, double* next_window_mae);

void write_results_json(const std::vector<ResultRow>& rows,
                        const std::string& path);
void write_results_csv(const std::vector<ResultRow>& rows,
                       const std::string& path);

}  // namespace admit
