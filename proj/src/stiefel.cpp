#include "qcflow/stiefel.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qcflow/errors.hpp"

namespace qcflow {

double orthonormality_residual(const Matrix& Y) {
  return (Y.transpose() * Y - Matrix::Identity(Y.cols(), Y.cols())).norm();
}

StiefelPoint::StiefelPoint(Matrix value, double tol) : value_(std::move(value)) {
  if (value_.rows() < value_.cols() || value_.cols() < 1) {
    throw SizeError("StiefelPoint: need p >= N >= 1, got " + std::to_string(value_.rows()) +
                    "x" + std::to_string(value_.cols()));
  }
  if (!value_.allFinite()) {
    throw ValidationError("StiefelPoint: non-finite entries");
  }
  const double res = orthonormality_residual(value_);
  if (!(res <= tol)) {
    throw ValidationError("StiefelPoint: orthonormality residual " + std::to_string(res) +
                          " exceeds tolerance " + std::to_string(tol));
  }
}

StiefelPoint StiefelPoint::without_column(Eigen::Index k) const {
  if (k < 0 || k >= cols() || cols() == 1) {
    throw SizeError("StiefelPoint::without_column: cannot remove column " + std::to_string(k) +
                    " of " + std::to_string(cols()));
  }
  Matrix out(rows(), cols() - 1);
  out.leftCols(k) = value_.leftCols(k);
  out.rightCols(cols() - 1 - k) = value_.rightCols(cols() - 1 - k);
  return StiefelPoint(std::move(out), Unchecked{});
}

namespace stiefel {

namespace {

void check_same_shape(const char* op, const Matrix& X, const StiefelPoint& Y) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols()) {
    throw SizeError(std::string(op) + ": shape " + std::to_string(X.rows()) + "x" +
                    std::to_string(X.cols()) + " does not match point " +
                    std::to_string(Y.rows()) + "x" + std::to_string(Y.cols()));
  }
}

}  // namespace

StiefelPoint random_stiefel(Eigen::Index p, Eigen::Index N, Rng& rng) {
  if (N < 1 || p < N) {
    throw SizeError("random_stiefel: need p >= N >= 1, got p=" + std::to_string(p) +
                    ", N=" + std::to_string(N));
  }
  std::normal_distribution<double> normal;
  Matrix G(p, N);
  for (Eigen::Index j = 0; j < N; ++j) {
    for (Eigen::Index i = 0; i < p; ++i) G(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(p, N);
  const Matrix R = qr.matrixQR().topRows(N).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < N; ++j) {
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  }
  return StiefelPoint(std::move(Q));
}

Matrix riemannian_gradient(const Matrix& euclidean_grad, const StiefelPoint& Y) {
  check_same_shape("riemannian_gradient", euclidean_grad, Y);
  const Matrix& y = Y.value();
  // 2·skew(G Yᵀ)·Y = G (YᵀY) − Y (GᵀY), evaluated without the p x p product.
  // This form stays exactly tangent even when Y has drifted off the manifold.
  return euclidean_grad * (y.transpose() * y) - y * (euclidean_grad.transpose() * y);
}

double tangency_residual(const Matrix& X, const StiefelPoint& Y) {
  check_same_shape("tangency_residual", X, Y);
  const Matrix c = X.transpose() * Y.value();
  return (c + c.transpose()).norm();
}

StiefelPoint reorthonormalize(const Matrix& Y) {
  if (Y.cols() < 1 || Y.rows() < Y.cols()) {
    throw SizeError("reorthonormalize: need p >= N >= 1");
  }
  if (!Y.allFinite()) throw NumericalError("reorthonormalize: non-finite input");
  if (orthonormality_residual(Y) <= kStiefelConstructionTol) return StiefelPoint(Y);

  Eigen::JacobiSVD<Matrix> svd(Y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cutoff = std::numeric_limits<double>::epsilon() * static_cast<double>(Y.rows()) *
                        s.maxCoeff();
  if (!(s.minCoeff() > cutoff)) {
    throw DegeneracyError("reorthonormalize: matrix is rank deficient (smallest singular value " +
                          std::to_string(s.minCoeff()) + ")");
  }
  Matrix W = svd.matrixU() * svd.matrixV().transpose();
  return StiefelPoint(std::move(W));
}

}  // namespace stiefel
}  // namespace qcflow
