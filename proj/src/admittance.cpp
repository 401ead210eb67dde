#include "admit/admittance.hpp"

#include <cmath>

namespace admit {

AdmittanceParams::AdmittanceParams(Vec m_, Vec k_, Vec d_)
    : m(std::move(m_)), k(std::move(k_)), d(std::move(d_)) {
  validate();
}

void AdmittanceParams::validate() const {
  if (m.size() != k.size() || m.size() != d.size())
    throw ShapeError("AdmittanceParams: m/k/d length mismatch");
  if (m.size() == 0) throw ShapeError("AdmittanceParams: empty");
  if ((m.array() <= 0).any() || (k.array() <= 0).any() ||
      (d.array() <= 0).any())
    throw StabilityError("AdmittanceParams: entries must be strictly positive");
  if (!all_finite(m) || !all_finite(k) || !all_finite(d))
    throw NumericError("AdmittanceParams: non-finite entry");
}

AdmittanceParams AdmittanceParams::fixed_inertia6(const Vec& k) {
  if (k.size() != 6) throw ShapeError("fixed_inertia6 expects 6 stiffnesses");
  Vec m(6);
  m << 1, 1, 1, 0.1, 0.1, 0.1;
  return AdmittanceParams(m, k, critical_damping(m, k));
}

Vec ParamVector::flat() const {
  Vec u(3 * inv_m.size());
  u << inv_m, k_norm, d_norm;
  return u;
}

ParamVector ParamVector::from_flat(const Vec& u) {
  if (u.size() % 3 != 0) throw ShapeError("ParamVector: length not 3n");
  const long n = u.size() / 3;
  return {u.segment(0, n), u.segment(n, n), u.segment(2 * n, n)};
}

void ParamVector::validate() const {
  if (inv_m.size() != k_norm.size() || inv_m.size() != d_norm.size())
    throw ShapeError("ParamVector: field length mismatch");
  if (inv_m.size() == 0) throw ShapeError("ParamVector: empty");
  if ((inv_m.array() <= 0).any() || (k_norm.array() <= 0).any() ||
      (d_norm.array() <= 0).any())
    throw StabilityError("ParamVector: entries must be strictly positive");
}

double critical_damping(double m, double k) {
  if (m < 0 || k < 0) throw std::domain_error("critical_damping: negative input");
  return 2.0 * std::sqrt(m * k);
}

Vec critical_damping(const Vec& m, const Vec& k) {
  if (m.size() != k.size()) throw ShapeError("critical_damping: length mismatch");
  if ((m.array() < 0).any() || (k.array() < 0).any())
    throw std::domain_error("critical_damping: negative input");
  return 2.0 * (m.array() * k.array()).sqrt();
}

ParamVector to_param_vector(const AdmittanceParams& p) {
  p.validate();
  ParamVector u;
  u.inv_m = p.m.cwiseInverse();
  u.k_norm = p.k.cwiseQuotient(p.m);
  u.d_norm = p.d.cwiseQuotient(p.m);
  return u;
}

AdmittanceParams recover_gains(const ParamVector& u) {
  u.validate();
  AdmittanceParams p;
  p.m = u.inv_m.cwiseInverse();
  p.k = p.m.cwiseProduct(u.k_norm);
  p.d = p.m.cwiseProduct(u.d_norm);
  return p;
}

ErrorState step_error_dynamics(const ErrorState& x, const Vec& f_ext,
                               const ParamVector& u, double dt) {
  if (dt <= 0) throw std::domain_error("step_error_dynamics: dt must be > 0");
  if (x.e.size() != x.e_dot.size() || x.e.size() != f_ext.size() ||
      x.e.size() != u.inv_m.size())
    throw ShapeError("step_error_dynamics: dimension mismatch");
  if (!all_finite(x.e) || !all_finite(x.e_dot) || !all_finite(f_ext))
    throw NumericError("step_error_dynamics: non-finite input");

  const Vec e_ddot = -u.d_norm.cwiseProduct(x.e_dot) -
                     u.k_norm.cwiseProduct(x.e) + u.inv_m.cwiseProduct(f_ext);
  ErrorState next;
  next.e_dot = x.e_dot + dt * e_ddot;
  next.e = x.e + dt * next.e_dot;
  return next;
}

TrajectorySamples compliant_rollout(const TrajectorySamples& desired,
                                    const Eigen::MatrixXd& f_ext,
                                    const AdmittanceParams& p, double dt) {
  const int steps = desired.steps();
  const int n = desired.axes();
  if (f_ext.rows() != steps || f_ext.cols() != n)
    throw ShapeError("compliant_rollout: force sample count mismatch");
  if (desired.vel.rows() != steps || desired.acc.rows() != steps)
    throw ShapeError("compliant_rollout: desired trajectory field mismatch");

  const ParamVector u = to_param_vector(p);
  TrajectorySamples out;
  out.pos.resize(steps, n);
  out.vel.resize(steps, n);
  out.acc.resize(steps, n);

  ErrorState x = ErrorState::zero(n);
  for (int i = 0; i < steps; ++i) {
    const Vec f = f_ext.row(i).transpose();
    const Vec e_ddot = -u.d_norm.cwiseProduct(x.e_dot) -
                       u.k_norm.cwiseProduct(x.e) + u.inv_m.cwiseProduct(f);
    out.pos.row(i) = desired.pos.row(i) + x.e.transpose();
    out.vel.row(i) = desired.vel.row(i) + x.e_dot.transpose();
    out.acc.row(i) = desired.acc.row(i) + e_ddot.transpose();
    x = step_error_dynamics(x, f, u, dt);
  }
  return out;
}

}  // namespace admit
