#pragma once

#include <deque>
#include <ostream>
#include <vector>

#include "admit/types.hpp"

namespace admit {

/// Timestamped ring buffer of measured external forces. Recording keeps the
/// newest `capacity` samples; the optimizer replays an immutable snapshot.
class ForceWindow {
 public:
  ForceWindow(size_t capacity, double dt);

  void record(double t, const Vec& f);

  // k-th recorded force; indices past the end hold the last sample so a
  // rollout horizon may exceed the window length.
  const Vec& replay(size_t k) const;

  size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  size_t capacity() const { return capacity_; }
  double dt() const { return dt_; }
  double timestamp(size_t k) const { return samples_.at(k).t; }

  ForceWindow snapshot() const { return *this; }

  // CSV columns: t, f_axis0..f_axisN-1
  void write_csv(std::ostream& os) const;

 private:
  struct Sample {
    double t;
    Vec f;
  };
  std::deque<Sample> samples_;
  size_t capacity_;
  double dt_;
};

/// Local spring-damper force model f = a x + b x_dot + c per axis.
struct LinearForceModel {
  Vec a;
  Vec b;
  Vec c;
  double residual_rms = 0.0;  // over the fitting window, all axes
  bool degenerate = false;    // ridge fallback was needed
};

// Per-axis ordinary least squares of the windowed forces against the matching
// position/velocity samples. Falls back to a small ridge term when the
// regressors are rank deficient.
LinearForceModel fit_linear_force(const ForceWindow& window,
                                  const Eigen::MatrixXd& x,
                                  const Eigen::MatrixXd& x_dot);

Vec predict_linear_force(const LinearForceModel& model, const Vec& x,
                         const Vec& x_dot);

}  // namespace admit
