#pragma once

#include <cstddef>
#include <functional>

#include "qcflow/linalg.hpp"

namespace qcflow {

/// Dormand–Prince 5(4) integrator with PI step control and the classical
/// fourth-order continuous extension, following Hairer, Nørsett & Wanner.
/// The stepper is driven one accepted step at a time so callers can handle
/// events between steps.
class Dopri5 {
 public:
  using Rhs = std::function<Vector(const Vector&)>;

  Dopri5(Rhs f, double abs_tol, double rel_tol);

  /// Starts (or restarts) at (t, y). Keeps the current step size as a hint
  /// unless no step has been taken yet, in which case an initial step is chosen.
  void reset(double t, Vector y);

  enum class Status { Accepted, Stalled };

  /// Takes one accepted step, never stepping past t_end. Returns Stalled
  /// when the step size collapses below 1e-14·max(|t|, 1).
  Status step(double t_end);

  double t() const { return t_; }
  const Vector& y() const { return y_; }
  /// Right-hand side at the current point.
  const Vector& f() const { return f_; }
  double t_prev() const { return t_prev_; }
  double step_size() const { return h_; }
  std::size_t accepted() const { return accepted_; }
  std::size_t rejected() const { return rejected_; }

  /// Continuous extension on [t_prev(), t()] of the last accepted step.
  Vector dense(double t) const;

 private:
  double initial_step(double t_end) const;
  double error_norm(const Vector& err, const Vector& y0, const Vector& y1) const;

  Rhs rhs_;
  double atol_;
  double rtol_;
  double t_ = 0.0;
  double t_prev_ = 0.0;
  double h_ = 0.0;
  double fac_old_ = 1e-4;
  bool last_rejected_ = false;
  Vector y_;
  Vector f_;
  Vector cont_[5];
  std::size_t accepted_ = 0;
  std::size_t rejected_ = 0;
};

}  // namespace qcflow
