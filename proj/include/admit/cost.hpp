#pragma once

#include <vector>

#include "admit/admittance.hpp"
#include "admit/types.hpp"

namespace admit {

struct CostWeights {
  double w = 0.4;        // 0 = pure velocity smoothness, 1 = pure tracking
  double horizon_T = 1.0;  // seconds

  void validate() const;
};

// Left-Riemann sum of t [ w |e| + (1-w) |e_dot| ] over the sampled window,
// per-axis absolute values summed (l1). t_k = k dt, so the first sample
// contributes nothing.
double trajectory_cost(const std::vector<ErrorState>& states, double dt,
                       const CostWeights& weights);

// w = 1 projection: time-weighted absolute position error.
double itae(const std::vector<ErrorState>& states, double dt);

// w = 0 projection: time-weighted absolute velocity error.
double fitave(const std::vector<ErrorState>& states, double dt);

}  // namespace admit
