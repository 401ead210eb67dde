#include "admit/force_window.hpp"

#include <cmath>
#include <iomanip>

namespace admit {

ForceWindow::ForceWindow(size_t capacity, double dt)
    : capacity_(capacity), dt_(dt) {
  if (capacity == 0) throw std::domain_error("ForceWindow: capacity must be > 0");
  if (dt <= 0) throw std::domain_error("ForceWindow: dt must be > 0");
}

void ForceWindow::record(double t, const Vec& f) {
  if (!all_finite(f)) throw NumericError("ForceWindow::record: non-finite force");
  if (!samples_.empty() && t <= samples_.back().t)
    throw std::invalid_argument("ForceWindow::record: non-monotone timestamp");
  if (samples_.size() == capacity_) samples_.pop_front();
  samples_.push_back({t, f});
}

const Vec& ForceWindow::replay(size_t k) const {
  if (samples_.empty()) throw std::domain_error("ForceWindow::replay: empty window");
  if (k >= samples_.size()) return samples_.back().f;
  return samples_[k].f;
}

void ForceWindow::write_csv(std::ostream& os) const {
  const long n = samples_.empty() ? 0 : samples_.front().f.size();
  os << "t";
  for (long i = 0; i < n; ++i) os << ",f_axis" << i;
  os << "\n";
  os << std::setprecision(17);
  for (const auto& s : samples_) {
    os << s.t;
    for (long i = 0; i < n; ++i) os << "," << s.f[i];
    os << "\n";
  }
}

LinearForceModel fit_linear_force(const ForceWindow& window,
                                  const Eigen::MatrixXd& x,
                                  const Eigen::MatrixXd& x_dot) {
  const long m = static_cast<long>(window.size());
  if (m < 3) throw std::domain_error("fit_linear_force: need at least 3 samples");
  if (x.rows() != m || x_dot.rows() != m)
    throw ShapeError("fit_linear_force: state sample count mismatch");
  const long n = window.replay(0).size();
  if (x.cols() != n || x_dot.cols() != n)
    throw ShapeError("fit_linear_force: axis count mismatch");

  LinearForceModel model;
  model.a.resize(n);
  model.b.resize(n);
  model.c.resize(n);

  double sq_sum = 0.0;
  for (long ax = 0; ax < n; ++ax) {
    Eigen::MatrixXd A(m, 3);
    Vec rhs(m);
    for (long i = 0; i < m; ++i) {
      A(i, 0) = x(i, ax);
      A(i, 1) = x_dot(i, ax);
      A(i, 2) = 1.0;
      rhs[i] = window.replay(static_cast<size_t>(i))[ax];
    }
    Eigen::Matrix3d G = A.transpose() * A;
    const Eigen::Vector3d g = A.transpose() * rhs;

    Eigen::FullPivLU<Eigen::Matrix3d> lu(G);
    Eigen::Vector3d coef;
    if (lu.isInvertible() && lu.rcond() > 1e-12) {
      coef = lu.solve(g);
    } else {
      // rank-deficient regressors: ridge fallback
      G.diagonal().array() += 1e-8;
      coef = G.ldlt().solve(g);
      model.degenerate = true;
    }
    model.a[ax] = coef[0];
    model.b[ax] = coef[1];
    model.c[ax] = coef[2];
    sq_sum += (A * coef - rhs).squaredNorm();
  }
  model.residual_rms = std::sqrt(sq_sum / static_cast<double>(m * n));
  return model;
}

Vec predict_linear_force(const LinearForceModel& model, const Vec& x,
                         const Vec& x_dot) {
  if (x.size() != model.a.size() || x_dot.size() != model.a.size())
    throw ShapeError("predict_linear_force: dimension mismatch");
  return model.a.cwiseProduct(x) + model.b.cwiseProduct(x_dot) + model.c;
}

}  // namespace admit
