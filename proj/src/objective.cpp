#include "qcflow/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qcflow/errors.hpp"

namespace qcflow {

CCFactorization::CCFactorization(StiefelPoint U, StiefelPoint V, Vector theta)
    : U_(std::move(U)), V_(std::move(V)), theta_(std::move(theta)) {
  if (U_.cols() != V_.cols() || U_.cols() != theta_.size()) {
    throw SizeError("CCFactorization: U has " + std::to_string(U_.cols()) + " columns, V has " +
                    std::to_string(V_.cols()) + ", theta has " +
                    std::to_string(theta_.size()) + " entries");
  }
  if (!theta_.allFinite()) throw ValidationError("CCFactorization: theta is not finite");
  for (Eigen::Index i = 0; i < theta_.size(); ++i) {
    if (!(theta_[i] > 0.0 && theta_[i] <= 1.0)) {
      throw ValidationError("CCFactorization: theta[" + std::to_string(i) + "] = " +
                            std::to_string(theta_[i]) + " is outside (0, 1]");
    }
  }
  const double sum = theta_.sum();
  if (!(std::abs(sum - 1.0) <= kThetaSumTol)) {
    throw ValidationError("CCFactorization: theta sums to " + std::to_string(sum));
  }
}

namespace objective {

namespace {

void check_dims(const DensityMatrix& rho, const CCFactorization& f) {
  if (rho.dim() != f.n() * f.m()) {
    throw SizeError("objective: density matrix is " + std::to_string(rho.dim()) +
                    "-dimensional but the factorization acts on R^" + std::to_string(f.n()) +
                    " (x) R^" + std::to_string(f.m()));
  }
}

Matrix sym_from_factors(const Matrix& Z, const Vector& theta) {
  return Z * theta.asDiagonal() * Z.transpose();
}

}  // namespace

Evaluation evaluate(const Matrix& rho, const Matrix& U, const Matrix& V, const Vector& theta) {
  const Eigen::Index n = U.rows();
  const Eigen::Index m = V.rows();
  const Eigen::Index N = theta.size();
  if (U.cols() != N || V.cols() != N || rho.rows() != n * m || rho.cols() != n * m) {
    throw SizeError("objective::evaluate: inconsistent dimensions");
  }
  Evaluation ev;
  ev.Z = linalg::khatri_rao(U, V);
  const Matrix rhoZ = rho * ev.Z;
  const Matrix A = rhoZ * theta.asDiagonal();
  const Matrix B = ev.Z * theta.cwiseAbs2().asDiagonal();
  const Vector vecA = linalg::vec(A);
  const Vector vecB = linalg::vec(B);
  ev.M_tilde = linalg::reshape(linalg::apply_M_transpose(V, vecA, n), n, N);
  ev.M_hat = linalg::reshape(linalg::apply_M_transpose(V, vecB, n), n, N);
  ev.N_tilde = linalg::reshape(linalg::apply_N_transpose(U, vecA, m), m, N);
  ev.N_hat = linalg::reshape(linalg::apply_N_transpose(U, vecB, m), m, N);
  ev.e.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    ev.e[i] = theta[i] - ev.Z.col(i).dot(rhoZ.col(i));
  }
  return ev;
}

double value_raw(const Matrix& rho, const Matrix& U, const Matrix& V, const Vector& theta) {
  const Matrix Z = linalg::khatri_rao(U, V);
  return 0.5 * (rho - sym_from_factors(Z, theta)).squaredNorm();
}

Matrix cc_state(const CCFactorization& f) {
  return sym_from_factors(linalg::khatri_rao(f.U().value(), f.V().value()), f.theta());
}

double objective_value(const DensityMatrix& rho, const CCFactorization& f) {
  check_dims(rho, f);
  return value_raw(rho.value(), f.U().value(), f.V().value(), f.theta());
}

GradientBundle gradient(const DensityMatrix& rho, const CCFactorization& f) {
  check_dims(rho, f);
  const Evaluation ev = evaluate(rho.value(), f.U().value(), f.V().value(), f.theta());
  GradientBundle g;
  g.dU = -2.0 * (ev.M_tilde - ev.M_hat);
  g.dV = -2.0 * (ev.N_tilde - ev.N_hat);
  g.dTheta = ev.e;
  g.value = objective_value(rho, f);
  return g;
}

GradientBundle riemannian_bundle(const DensityMatrix& rho, const CCFactorization& f) {
  GradientBundle g = gradient(rho, f);
  g.dU = stiefel::riemannian_gradient(g.dU, f.U());
  g.dV = stiefel::riemannian_gradient(g.dV, f.V());
  return g;
}

double stationarity_residual(const DensityMatrix& rho, const CCFactorization& f) {
  check_dims(rho, f);
  const Evaluation ev = evaluate(rho.value(), f.U().value(), f.V().value(), f.theta());
  const Matrix& U = f.U().value();
  const Matrix& V = f.V().value();
  const Matrix DM = ev.M_tilde - ev.M_hat;
  const Matrix DN = ev.N_tilde - ev.N_hat;
  const double ru = (U.transpose() * DM - DM.transpose() * U).norm();
  const double rv = (V.transpose() * DN - DN.transpose() * V).norm();
  const double rt = (ev.e.array() - ev.e.mean()).matrix().norm();
  return std::max({ru, rv, rt});
}

}  // namespace objective
}  // namespace qcflow
