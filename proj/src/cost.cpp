#include "admit/cost.hpp"

namespace admit {

void CostWeights::validate() const {
  if (w < 0 || w > 1) throw std::domain_error("CostWeights: w must be in [0,1]");
  if (horizon_T <= 0) throw std::domain_error("CostWeights: horizon_T must be > 0");
}

namespace {

double weighted_sum(const std::vector<ErrorState>& states, double dt, double w) {
  if (states.empty()) throw std::domain_error("trajectory_cost: empty sequence");
  if (dt <= 0) throw std::domain_error("trajectory_cost: dt must be > 0");
  double acc = 0.0;
  for (size_t k = 0; k < states.size(); ++k) {
    const double t = static_cast<double>(k) * dt;
    acc += t * (w * states[k].e.cwiseAbs().sum() +
                (1.0 - w) * states[k].e_dot.cwiseAbs().sum()) * dt;
  }
  return acc;
}

}  // namespace

double trajectory_cost(const std::vector<ErrorState>& states, double dt,
                       const CostWeights& weights) {
  weights.validate();
  return weighted_sum(states, dt, weights.w);
}

double itae(const std::vector<ErrorState>& states, double dt) {
  return weighted_sum(states, dt, 1.0);
}

double fitave(const std::vector<ErrorState>& states, double dt) {
  return weighted_sum(states, dt, 0.0);
}

}  // namespace admit
