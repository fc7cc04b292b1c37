#include "qcflow/linalg.hpp"

#include <string>

#include "qcflow/errors.hpp"

namespace qcflow::linalg {

namespace {

std::string shape(const Matrix& A) {
  return std::to_string(A.rows()) + "x" + std::to_string(A.cols());
}

}  // namespace

Vector vec(const Matrix& A) {
  return Eigen::Map<const Vector>(A.data(), A.size());
}

Matrix reshape(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  if (rows < 0 || cols < 0 || v.size() != rows * cols) {
    throw SizeError("reshape: cannot view a vector of length " + std::to_string(v.size()) +
                    " as " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a[i] * b;
  }
  return out;
}

Matrix khatri_rao(const Matrix& U, const Matrix& V) {
  if (U.cols() != V.cols()) {
    throw SizeError("khatri_rao: column counts differ (" + shape(U) + " vs " + shape(V) + ")");
  }
  const Eigen::Index n = U.rows();
  const Eigen::Index m = V.rows();
  Matrix out(n * m, U.cols());
  for (Eigen::Index k = 0; k < U.cols(); ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      out.col(k).segment(i * m, m) = U(i, k) * V.col(k);
    }
  }
  return out;
}

Matrix skew(const Matrix& A) {
  if (A.rows() != A.cols()) {
    throw SizeError("skew: matrix is not square (" + shape(A) + ")");
  }
  return 0.5 * (A - A.transpose());
}

double frobenius_inner(const Matrix& A, const Matrix& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) {
    throw SizeError("frobenius_inner: shapes differ (" + shape(A) + " vs " + shape(B) + ")");
  }
  return A.cwiseProduct(B).sum();
}

bool all_finite(const Matrix& A) { return A.allFinite(); }

Vector apply_M_transpose(const Matrix& V, const Vector& w, Eigen::Index n) {
  const Eigen::Index m = V.rows();
  const Eigen::Index N = V.cols();
  if (n < 1 || w.size() != n * m * N) {
    throw SizeError("apply_M_transpose: expected a vector of length " +
                    std::to_string(n * m * N) + ", got " + std::to_string(w.size()));
  }
  Vector out(n * N);
  for (Eigen::Index k = 0; k < N; ++k) {
    // Segment k viewed column-major as an m x n matrix W; block k of M^T w is W^T v_k.
    Eigen::Map<const Matrix> W(w.data() + k * n * m, m, n);
    out.segment(k * n, n).noalias() = W.transpose() * V.col(k);
  }
  return out;
}

Vector apply_N_transpose(const Matrix& U, const Vector& w, Eigen::Index m) {
  const Eigen::Index n = U.rows();
  const Eigen::Index N = U.cols();
  if (m < 1 || w.size() != n * m * N) {
    throw SizeError("apply_N_transpose: expected a vector of length " +
                    std::to_string(n * m * N) + ", got " + std::to_string(w.size()));
  }
  Vector out(m * N);
  for (Eigen::Index k = 0; k < N; ++k) {
    Eigen::Map<const Matrix> W(w.data() + k * n * m, m, n);
    out.segment(k * m, m).noalias() = W * U.col(k);
  }
  return out;
}

Matrix build_M_explicit(const Matrix& V, Eigen::Index n) {
  if (n < 1) throw SizeError("build_M_explicit: n must be positive");
  const Eigen::Index m = V.rows();
  const Eigen::Index N = V.cols();
  Matrix M = Matrix::Zero(n * m * N, n * N);
  for (Eigen::Index k = 0; k < N; ++k) {
    for (Eigen::Index a = 0; a < n; ++a) {
      M.col(k * n + a).segment(k * n * m + a * m, m) = V.col(k);
    }
  }
  return M;
}

Matrix build_N_explicit(const Matrix& U, Eigen::Index m) {
  if (m < 1) throw SizeError("build_N_explicit: m must be positive");
  const Eigen::Index n = U.rows();
  const Eigen::Index N = U.cols();
  Matrix Nm = Matrix::Zero(n * m * N, m * N);
  for (Eigen::Index k = 0; k < N; ++k) {
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index j = 0; j < m; ++j) {
        Nm(k * n * m + a * m + j, k * m + j) = U(a, k);
      }
    }
  }
  return Nm;
}

}  // namespace qcflow::linalg
