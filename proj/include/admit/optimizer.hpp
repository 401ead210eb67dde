#pragma once

#include <functional>
#include <optional>

#include "admit/admittance.hpp"
#include "admit/cost.hpp"
#include "admit/force_window.hpp"

namespace admit {

/// Box bounds on the recovered per-axis gains (m, k, d). The windowed cost is
/// trivially minimized by an infinitely stiff/heavy virtual system (it never
/// moves, so the tracking error is zero no matter what force is replayed), so
/// the search needs a bounded gain range to stay physically meaningful. The
/// online range is deliberately narrower than the offline search space: it is
/// the gain region the adaptive controller is allowed to hold during contact,
/// and starting gains outside it are projected in at the first update.
struct GainBox {
  double m_min = 0.5, m_max = 5.0;
  double k_min = 10.0, k_max = 2500.0;
  double d_min = 5.0, d_max = 500.0;

  void validate() const;
  bool contains(const AdmittanceParams& p) const;
};

/// One windowed residual-optimization problem: re-simulate the error dynamics
/// from the window-start state against the replayed forces and score the
/// result.
struct OptProblem {
  ParamVector u_init;
  ErrorState x0;
  ForceWindow window;
  double dt = 0.01;
  CostWeights weights;
  GainBox box;
  double eps = 1e-3;  // lower floor for u_init + delta_u
  int budget = 200;   // max objective evaluations
  // Max per-update movement in log-gain space (0 = unlimited). The online
  // loop rate-limits gain swaps so a single window cannot yank the gains
  // across the box while the companion gains lag behind.
  double trust_radius = 0.0;

  void validate() const;
};

struct OptResult {
  Vec delta_u;
  double cost_before = 0.0;
  double cost_after = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Thrown when a candidate violates the positivity floor; candidates are
// projected before evaluation, so seeing this means a caller bug.
struct ConstraintError : std::domain_error {
  explicit ConstraintError(const std::string& what) : std::domain_error(what) {}
};

// Cost of running the error dynamics over the window horizon with parameters
// u_init + delta_u and the recorded forces.
double rollout_cost(const OptProblem& problem, const Vec& delta_u);

// Central finite-difference gradient of rollout_cost at delta_u.
Vec rollout_cost_gradient(const OptProblem& problem, const Vec& delta_u,
                          int* evaluations = nullptr);

// Projected gradient descent on the log-gains with backtracking line search;
// the box projection is a per-coordinate clamp in log space and positivity is
// automatic. delta_u = 0 is always a candidate, so cost_after <= cost_before.
OptResult optimize_residual(const OptProblem& problem);

// Same search over an arbitrary windowed cost (used by the force-model
// comparison, where replay is swapped for a fitted force model).
using RolloutCost = std::function<double(const Vec& delta_u)>;
OptResult optimize_local(const RolloutCost& cost, const ParamVector& u_init,
                         const GainBox& box, int budget,
                         double trust_radius = 0.0);

}  // namespace admit
