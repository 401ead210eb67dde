#pragma once

#include <vector>

#include "admit/types.hpp"

namespace admit {

/// Diagonal virtual mass-spring-damper gains, one entry per Cartesian axis.
struct AdmittanceParams {
  Vec m;  // inertia [kg] or [kg m^2]
  Vec k;  // stiffness [N/m] or [N m/rad]
  Vec d;  // damping [N s/m] or [N m s/rad]

  AdmittanceParams() = default;
  AdmittanceParams(Vec m_, Vec k_, Vec d_);

  int axes() const { return static_cast<int>(m.size()); }

  // Six-axis gains with the translational inertia fixed to 1 and the
  // rotational inertia fixed to 0.1, damping critically tuned from k.
  static AdmittanceParams fixed_inertia6(const Vec& k);

  void validate() const;
};

/// Optimization variable: diagonal of M^-1, M^-1 K and M^-1 D stacked.
struct ParamVector {
  Vec inv_m;
  Vec k_norm;
  Vec d_norm;

  int axes() const { return static_cast<int>(inv_m.size()); }

  Vec flat() const;                          // [inv_m; k_norm; d_norm]
  static ParamVector from_flat(const Vec& u);

  void validate() const;
};

/// Error state x = [e, e_dot] of the compliant minus desired trajectory.
struct ErrorState {
  Vec e;
  Vec e_dot;

  static ErrorState zero(int n) { return {Vec::Zero(n), Vec::Zero(n)}; }
};

// d = 2 sqrt(m k), elementwise. Negative input throws.
double critical_damping(double m, double k);
Vec critical_damping(const Vec& m, const Vec& k);

ParamVector to_param_vector(const AdmittanceParams& p);
AdmittanceParams recover_gains(const ParamVector& u);

// One semi-implicit Euler step of
//   e_ddot = -d_norm.*e_dot - k_norm.*e + inv_m.*f_ext
// velocity first, then position with the updated velocity.
ErrorState step_error_dynamics(const ErrorState& x, const Vec& f_ext,
                               const ParamVector& u, double dt);

/// Sampled trajectory (positions, velocities, accelerations), row = time step.
struct TrajectorySamples {
  Eigen::MatrixXd pos;
  Eigen::MatrixXd vel;
  Eigen::MatrixXd acc;

  int steps() const { return static_cast<int>(pos.rows()); }
  int axes() const { return static_cast<int>(pos.cols()); }
};

// Integrates the admittance law against a recorded force sequence, starting
// on the desired trajectory (e = e_dot = 0).
TrajectorySamples compliant_rollout(const TrajectorySamples& desired,
                                    const Eigen::MatrixXd& f_ext,
                                    const AdmittanceParams& p, double dt);

}  // namespace admit
