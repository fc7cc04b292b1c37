#pragma once

#include "qcflow/linalg.hpp"
#include "qcflow/random.hpp"

namespace qcflow {

/// Orthonormality tolerance enforced when a StiefelPoint is built from scratch.
inline constexpr double kStiefelConstructionTol = 1e-12;

/// ‖YᵀY − I‖_F.
double orthonormality_residual(const Matrix& Y);

/// A p x N matrix with orthonormal columns (p >= N).
class StiefelPoint {
 public:
  /// Throws SizeError if p < N and ValidationError if the columns are not
  /// orthonormal to within `tol`.
  explicit StiefelPoint(Matrix value, double tol = kStiefelConstructionTol);

  const Matrix& value() const { return value_; }
  Eigen::Index rows() const { return value_.rows(); }
  Eigen::Index cols() const { return value_.cols(); }
  double residual() const { return orthonormality_residual(value_); }

  /// Drops column k.
  StiefelPoint without_column(Eigen::Index k) const;

 private:
  struct Unchecked {};
  StiefelPoint(Matrix value, Unchecked) : value_(std::move(value)) {}

  Matrix value_;
};

namespace stiefel {

/// Orthonormalizes a p x N standard normal matrix by QR with a nonnegative
/// diagonal in R, giving the orthogonally invariant distribution.
StiefelPoint random_stiefel(Eigen::Index p, Eigen::Index N, Rng& rng);

/// Canonical-metric Riemannian gradient 2·skew(G Yᵀ)·Y of a Euclidean gradient G at Y.
Matrix riemannian_gradient(const Matrix& euclidean_grad, const StiefelPoint& Y);

/// ‖XᵀY + YᵀX‖_F; zero exactly on the tangent space at Y.
double tangency_residual(const Matrix& X, const StiefelPoint& Y);

/// Polar factor of Y, the Frobenius-nearest matrix with orthonormal columns.
/// Throws DegeneracyError when Y is (numerically) rank deficient.
StiefelPoint reorthonormalize(const Matrix& Y);

}  // namespace stiefel
}  // namespace qcflow
