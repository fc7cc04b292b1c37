#include "qcflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qcflow/dopri5.hpp"

namespace qcflow {

FlowState::FlowState(Vector p, FlowDims d) : packed(std::move(p)), dims(d) {
  if (dims.n < 1 || dims.m < 1 || dims.N < 1 || packed.size() != dims.packed_size()) {
    throw SizeError("FlowState: packed length " + std::to_string(packed.size()) +
                    " does not match dims (" + std::to_string(dims.n) + ", " +
                    std::to_string(dims.m) + ", " + std::to_string(dims.N) + ")");
  }
}

FlowState FlowState::pack(const CCFactorization& f) {
  const FlowDims dims{f.n(), f.m(), f.rank()};
  Vector packed(dims.packed_size());
  packed << linalg::vec(f.U().value()), linalg::vec(f.V().value()), f.theta();
  return FlowState(std::move(packed), dims);
}

Eigen::Map<const Matrix> FlowState::U() const {
  return Eigen::Map<const Matrix>(packed.data(), dims.n, dims.N);
}

Eigen::Map<const Matrix> FlowState::V() const {
  return Eigen::Map<const Matrix>(packed.data() + dims.n * dims.N, dims.m, dims.N);
}

Eigen::Map<const Vector> FlowState::theta() const {
  return Eigen::Map<const Vector>(packed.data() + (dims.n + dims.m) * dims.N, dims.N);
}

CCFactorization FlowState::unpack(double drift_tol) const {
  return CCFactorization(StiefelPoint(U(), drift_tol), StiefelPoint(V(), drift_tol), theta());
}

void FlowConfig::validate() const {
  const auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(abs_tol) || !positive(rel_tol) || !positive(t_max) || !positive(grad_tol) ||
      !positive(discard_eps) || !positive(drift_tol)) {
    throw ValidationError("FlowConfig: every tolerance and t_max must be positive and finite");
  }
}

std::string to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::Stationarity: return "stationarity";
    case TerminationReason::Horizon: return "horizon";
    case TerminationReason::StepStall: return "step_stall";
  }
  return "unknown";
}

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Discard: return "discard";
    case EventKind::Reorthonormalize: return "reorthonormalize";
    case EventKind::Terminate: return "terminate";
  }
  return "unknown";
}

std::size_t Trajectory::count(EventKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [&](const auto& e) { return e.kind == kind; }));
}

double Trajectory::max_theta_sum_error() const {
  double worst = 0.0;
  for (const auto& s : samples) worst = std::max(worst, std::abs(s.theta_sum - 1.0));
  return worst;
}

double Trajectory::max_ortho_residual() const {
  double worst = 0.0;
  for (const auto& s : samples) worst = std::max({worst, s.ortho_u, s.ortho_v});
  return worst;
}

namespace flow {

Vector rhs_raw(const Vector& packed, const FlowDims& dims, const Matrix& rho) {
  const auto n = dims.n, m = dims.m, N = dims.N;
  const Eigen::Map<const Matrix> U(packed.data(), n, N);
  const Eigen::Map<const Matrix> V(packed.data() + n * N, m, N);
  const Eigen::Map<const Vector> theta(packed.data() + (n + m) * N, N);

  const objective::Evaluation ev = objective::evaluate(rho, U, V, theta);
  const Matrix gU = -2.0 * (ev.M_tilde - ev.M_hat);
  const Matrix gV = -2.0 * (ev.N_tilde - ev.N_hat);

  Vector out(packed.size());
  Eigen::Map<Matrix> dU(out.data(), n, N);
  Eigen::Map<Matrix> dV(out.data() + n * N, m, N);
  Eigen::Map<Vector> dTheta(out.data() + (n + m) * N, N);
  // −2·skew(G Yᵀ)·Y = −(G (YᵀY) − Y (GᵀY))
  dU = U * (gU.transpose() * U) - gU * (U.transpose() * U);
  dV = V * (gV.transpose() * V) - gV * (V.transpose() * V);
  dTheta = -(ev.e.array() - ev.e.mean()).matrix();
  return out;
}

FlowState rhs(const FlowState& state, const DensityMatrix& rho) {
  if (rho.dim() != state.dims.n * state.dims.m) {
    throw SizeError("flow::rhs: density matrix dimension does not match the state");
  }
  Vector v = rhs_raw(state.packed, state.dims, rho.value());
  if (!v.allFinite()) {
    throw NumericalError("flow::rhs: non-finite velocity");
  }
  return FlowState(std::move(v), state.dims);
}

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Working copy of the integration state with column labels that survive discards.
struct Run {
  const Matrix& rho;
  const FlowConfig& cfg;
  FlowDims dims;
  std::vector<Eigen::Index> labels;  // initial column index of each live column
  Trajectory traj;

  Matrix U(const Vector& y) const { return Eigen::Map<const Matrix>(y.data(), dims.n, dims.N); }
  Matrix V(const Vector& y) const {
    return Eigen::Map<const Matrix>(y.data() + dims.n * dims.N, dims.m, dims.N);
  }
  Vector theta(const Vector& y) const {
    return Eigen::Map<const Vector>(y.data() + (dims.n + dims.m) * dims.N, dims.N);
  }
  Vector pack(const Matrix& u, const Matrix& v, const Vector& th) const {
    Vector y(dims.packed_size());
    y << linalg::vec(u), linalg::vec(v), th;
    return y;
  }

  void record(double t, const Vector& y, const Vector& f) {
    FlowSample s;
    s.t = t;
    const Matrix u = U(y), v = V(y);
    const Vector th = theta(y);
    s.objective = objective::value_raw(rho, u, v, th);
    s.theta_sum = th.sum();
    s.theta.assign(static_cast<std::size_t>(traj.initial_rank), std::nullopt);
    for (Eigen::Index i = 0; i < dims.N; ++i) {
      s.theta[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] = th[i];
    }
    s.ortho_u = orthonormality_residual(u);
    s.ortho_v = orthonormality_residual(v);
    s.grad_norm = f.norm();
    traj.samples.push_back(std::move(s));
  }

  // Removes every weight at or below discard_eps and renormalizes the rest.
  // Returns true when the state changed.
  bool discard(double t, Vector& y) {
    Vector th = theta(y);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < dims.N; ++i) {
      if (th[i] > cfg.discard_eps) keep.push_back(i);
    }
    if (static_cast<Eigen::Index>(keep.size()) == dims.N) return false;
    // Σθ = 1 forces at least one weight >= 1/N, so `keep` is never empty.
    const Matrix u = U(y), v = V(y);
    Matrix u2(dims.n, static_cast<Eigen::Index>(keep.size()));
    Matrix v2(dims.m, u2.cols());
    Vector th2(u2.cols());
    std::vector<Eigen::Index> labels2;
    std::size_t next = 0;
    const std::size_t first_event = traj.events.size();
    for (Eigen::Index i = 0; i < dims.N; ++i) {
      if (next < keep.size() && keep[next] == i) {
        const auto j = static_cast<Eigen::Index>(next++);
        u2.col(j) = u.col(i);
        v2.col(j) = v.col(i);
        th2[j] = th[i];
        labels2.push_back(labels[static_cast<std::size_t>(i)]);
      } else {
        std::ostringstream detail;
        detail.precision(17);
        detail << "theta_" << labels[static_cast<std::size_t>(i)] + 1 << " value=" << th[i];
        traj.events.push_back({t, EventKind::Discard, detail.str()});
      }
    }
    const double scale = 1.0 / th2.sum();
    th2 *= scale;
    for (std::size_t e = first_event; e < traj.events.size(); ++e) {
      traj.events[e].detail += " renormalization=" + format_double(scale);
    }
    dims.N = u2.cols();
    labels = std::move(labels2);
    y = pack(u2, v2, th2);
    return true;
  }

  bool repair(double t, Vector& y) {
    Matrix u = U(y), v = V(y);
    bool changed = false;
    const double ru = orthonormality_residual(u);
    if (ru > cfg.drift_tol) {
      u = stiefel::reorthonormalize(u).value();
      traj.events.push_back({t, EventKind::Reorthonormalize, "U residual=" + format_double(ru)});
      changed = true;
    }
    const double rv = orthonormality_residual(v);
    if (rv > cfg.drift_tol) {
      v = stiefel::reorthonormalize(v).value();
      traj.events.push_back({t, EventKind::Reorthonormalize, "V residual=" + format_double(rv)});
      changed = true;
    }
    if (changed) y = pack(u, v, theta(y));
    return changed;
  }
};

// Earliest time in (t0, t1] at which some θᵢ reaches `level`, by bisection on the
// continuous extension. Only components already at or below `level` at t1 count.
double locate_crossing(const Dopri5& stepper, const FlowDims& dims, double level) {
  const Eigen::Index offset = (dims.n + dims.m) * dims.N;
  const Vector& y1 = stepper.y();
  double best = stepper.t();
  for (Eigen::Index i = 0; i < dims.N; ++i) {
    if (y1[offset + i] > level) continue;
    double lo = stepper.t_prev();
    double hi = stepper.t();
    for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi;
         ++it) {
      const double mid = 0.5 * (lo + hi);
      if (stepper.dense(mid)[offset + i] > level) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    best = std::min(best, hi);
  }
  return best;
}

}  // namespace

FlowResult integrate(const DensityMatrix& rho, const CCFactorization& init, const FlowConfig& cfg) {
  cfg.validate();
  if (rho.dim() != init.n() * init.m()) {
    throw SizeError("flow::integrate: density matrix is " + std::to_string(rho.dim()) +
                    "-dimensional but the initial factorization acts on R^" +
                    std::to_string(init.n()) + " (x) R^" + std::to_string(init.m()));
  }

  Run run{rho.value(), cfg, FlowDims{init.n(), init.m(), init.rank()}, {}, {}};
  run.traj.initial_rank = init.rank();
  for (Eigen::Index i = 0; i < init.rank(); ++i) run.labels.push_back(i);

  const auto fail = [&](const std::string& why) -> IntegrationError {
    return IntegrationError("flow::integrate: " + why, run.traj);
  };

  Dopri5 stepper([&run](const Vector& y) { return rhs_raw(y, run.dims, run.rho); },
                 cfg.abs_tol, cfg.rel_tol);

  Vector y = FlowState::pack(init).packed;
  run.discard(0.0, y);
  stepper.reset(0.0, y);
  if (!stepper.f().allFinite()) throw fail("non-finite velocity at t = 0");
  run.record(0.0, stepper.y(), stepper.f());

  TerminationReason reason = TerminationReason::Horizon;
  while (true) {
    if (stepper.f().norm() <= cfg.grad_tol) {
      reason = TerminationReason::Stationarity;
      break;
    }
    if (stepper.t() >= cfg.t_max) {
      reason = TerminationReason::Horizon;
      break;
    }
    Dopri5::Status status;
    try {
      status = stepper.step(cfg.t_max);
    } catch (const NumericalError& e) {
      throw fail(e.what());
    }
    if (status == Dopri5::Status::Stalled) {
      reason = TerminationReason::StepStall;
      break;
    }

    double t = stepper.t();
    Vector state = stepper.y();
    bool restart = false;
    const Eigen::Index offset = (run.dims.n + run.dims.m) * run.dims.N;
    if (state.segment(offset, run.dims.N).minCoeff() <= cfg.discard_eps) {
      t = locate_crossing(stepper, run.dims, cfg.discard_eps);
      state = stepper.dense(t);
      restart = run.discard(t, state);
    }
    restart = run.repair(t, state) || restart;
    if (restart) stepper.reset(t, std::move(state));
    if (!stepper.y().allFinite() || !stepper.f().allFinite()) {
      throw fail("non-finite state at t = " + format_double(t));
    }
    run.record(stepper.t(), stepper.y(), stepper.f());
  }

  run.traj.accepted_steps = stepper.accepted();
  run.traj.rejected_steps = stepper.rejected();
  run.traj.events.push_back({stepper.t(), EventKind::Terminate, to_string(reason)});

  const FlowState final_state(stepper.y(), run.dims);
  CCFactorization result = final_state.unpack(std::max(cfg.drift_tol, kStiefelConstructionTol));
  return FlowResult{std::move(result), std::move(run.traj), reason};
}

}  // namespace flow
}  // namespace qcflow
