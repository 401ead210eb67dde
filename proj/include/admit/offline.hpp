#pragma once

#include <optional>
#include <string>
#include <vector>

#include "admit/admittance.hpp"
#include "admit/contact_env.hpp"
#include "admit/controller.hpp"
#include "admit/trajectory.hpp"

namespace admit {

struct GainSearchConfig {
  int population = 32;
  double elite_frac = 0.25;
  int iterations = 10;
  Vec k_lower, k_upper;  // stiffness search bounds per axis [N/m]
  Vec d_lower, d_upper;  // damping search bounds per axis [N s/m]
  Vec m_fixed;           // inertia held fixed during the search
  std::vector<unsigned long long> episode_seeds;
  double force_penalty = 0.01;  // score penalty per N of peak contact force
  double reward_scale = 100.0;  // distance scale inside the assembly reward
  unsigned long long rng_seed = 0;

  int elite_count() const;
  void validate() const;
};

struct GainSearchResult {
  ParamVector u_init;
  double score = 0.0;          // mean episode score of the returned gains
  double initial_score = 0.0;  // score of the initial sampling mean
  std::vector<double> elite_mean_history;
  bool all_failed = false;
};

// Mean per-seed episode score of a gain candidate in the nominal environment:
// task reward minus a peak-force penalty, no online adaptation.
double evaluate_gains(const AdmittanceParams& p, const EnvConfig& env_cfg,
                      const GainSearchConfig& cfg);

// Cross-entropy search over log stiffness/damping maximizing evaluate_gains.
GainSearchResult cem_gain_search(const GainSearchConfig& cfg,
                                 const EnvConfig& env_cfg);

// name = "manual_tune" returns the hand-tuned reference set for the task;
// name = "direct_transfer" passes the offline search output through.
AdmittanceParams load_baseline_gains(
    const std::string& name, Task task, int axes,
    const std::optional<ParamVector>& learned = std::nullopt);

// JSON gain file: task, axis labels, m/k/d arrays, provenance (seed + hash).
void save_gain_file(const std::string& path, Task task,
                    const AdmittanceParams& p, unsigned long long seed,
                    const std::string& config_hash);
AdmittanceParams load_gain_file(const std::string& path, Task* task = nullptr);

}  // namespace admit
