#pragma once

#include <Eigen/Dense>

namespace qcflow {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

/// Stacks the columns of A: entry k*rows + i is A(i, k).
Vector vec(const Matrix& A);

/// Inverse of vec. Throws SizeError unless v.size() == rows * cols.
Matrix reshape(const Vector& v, Eigen::Index rows, Eigen::Index cols);

/// Kronecker product of two vectors; entry i*m + j is a[i]*b[j].
Vector kron(const Vector& a, const Vector& b);

/// Column-wise Kronecker product: column i is kron(U.col(i), V.col(i)).
Matrix khatri_rao(const Matrix& U, const Matrix& V);

/// (A - A^T) / 2 for square A.
Matrix skew(const Matrix& A);

/// Sum of A(i,j) * B(i,j).
double frobenius_inner(const Matrix& A, const Matrix& B);

bool all_finite(const Matrix& A);

// The operators M and N satisfy vec(X ⊙ V) = M vec(X) and vec(U ⊙ Y) = N vec(Y).
// They are block diagonal with blocks (I_n ⊗ v_i) and (u_i ⊗ I_m). The appliers
// below compute M^T w and N^T w in O(nmN) without forming either matrix.

/// M^T w for M = blockdiag(I_n ⊗ v_i). w has length n*m*N; result has length n*N.
Vector apply_M_transpose(const Matrix& V, const Vector& w, Eigen::Index n);

/// N^T w for N = blockdiag(u_i ⊗ I_m). w has length n*m*N; result has length m*N.
Vector apply_N_transpose(const Matrix& U, const Vector& w, Eigen::Index m);

/// Dense M (nmN x nN). Only meant for tests and small problems.
Matrix build_M_explicit(const Matrix& V, Eigen::Index n);

/// Dense N (nmN x mN). Only meant for tests and small problems.
Matrix build_N_explicit(const Matrix& U, Eigen::Index m);

}  // namespace linalg
}  // namespace qcflow
