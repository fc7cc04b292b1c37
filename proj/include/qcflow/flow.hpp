#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qcflow/errors.hpp"
#include "qcflow/objective.hpp"

namespace qcflow {

struct FlowDims {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  Eigen::Index N = 0;

  Eigen::Index packed_size() const { return n * N + m * N + N; }
  bool operator==(const FlowDims&) const = default;
};

/// Flattened ODE state: vec(U), then vec(V), then θ.
struct FlowState {
  Vector packed;
  FlowDims dims;

  /// Throws SizeError when packed.size() does not match dims.
  FlowState(Vector packed, FlowDims dims);

  static FlowState pack(const CCFactorization& f);

  /// Rebuilds the factorization, checking orthonormality at `drift_tol` and
  /// the θ simplex constraint.
  CCFactorization unpack(double drift_tol = 1e-8) const;

  Eigen::Map<const Matrix> U() const;
  Eigen::Map<const Matrix> V() const;
  Eigen::Map<const Vector> theta() const;
};

struct FlowConfig {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double t_max = 5000.0;
  double grad_tol = 1e-10;     ///< stop once ‖rhs‖ falls to this value
  double discard_eps = 1e-10;  ///< weights at or below this are removed
  double drift_tol = 1e-8;     ///< orthonormality residual that triggers a polar repair

  /// Throws ValidationError unless every tolerance is positive.
  void validate() const;
};

enum class TerminationReason { Stationarity, Horizon, StepStall };

std::string to_string(TerminationReason reason);

struct FlowSample {
  double t = 0.0;
  double objective = 0.0;
  double theta_sum = 0.0;
  /// Indexed by the initial column; empty once that column has been discarded.
  std::vector<std::optional<double>> theta;
  double ortho_u = 0.0;
  double ortho_v = 0.0;
  double grad_norm = 0.0;
};

enum class EventKind { Discard, Reorthonormalize, Terminate };

std::string to_string(EventKind kind);

struct FlowEvent {
  double t = 0.0;
  EventKind kind = EventKind::Discard;
  std::string detail;
};

struct Trajectory {
  Eigen::Index initial_rank = 0;
  std::vector<FlowSample> samples;
  std::vector<FlowEvent> events;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;

  std::size_t count(EventKind kind) const;
  /// Largest |Σθ − 1| over all samples.
  double max_theta_sum_error() const;
  double max_ortho_residual() const;
};

struct FlowResult {
  CCFactorization factorization;
  Trajectory trajectory;
  TerminationReason reason;
};

/// Raised when the state stops being finite; carries everything recorded so far.
class IntegrationError : public NumericalError {
 public:
  IntegrationError(const std::string& what, Trajectory last_good)
      : NumericalError(what), trajectory_(std::move(last_good)) {}
  const Trajectory& trajectory() const { return trajectory_; }

 private:
  Trajectory trajectory_;
};

namespace flow {

/// Velocity of the descent flow at `state`, packed like the state:
///   dU/dt = −2·skew((∂F/∂U) Uᵀ) U,  dV/dt = −2·skew((∂F/∂V) Vᵀ) V,
///   dθᵢ/dt = −(eᵢ − mean(e)).
FlowState rhs(const FlowState& state, const DensityMatrix& rho);

/// Same as rhs() on a raw packed vector, without validating the state.
Vector rhs_raw(const Vector& packed, const FlowDims& dims, const Matrix& rho);

/// Integrates the flow from `init` with Dormand–Prince 4(5), discarding weights
/// that decay to `discard_eps` and repairing orthonormality drift beyond `drift_tol`.
FlowResult integrate(const DensityMatrix& rho, const CCFactorization& init,
                     const FlowConfig& cfg = {});

}  // namespace flow
}  // namespace qcflow
