#pragma once

#include <string>

#include "qcflow/linalg.hpp"

namespace qcflow {

/// Tolerances used to admit a matrix as a density matrix.
struct DensityTolerances {
  double symmetry = 1e-12;    ///< max |A - Aᵀ| entry
  double eigenvalue = 1e-10;  ///< smallest eigenvalue must be >= -eigenvalue
  double trace = 1e-12;       ///< |tr A - 1|
};

/// Measured deviations of a candidate matrix from the density-matrix invariants.
struct DensityReport {
  double symmetry_error = 0.0;
  double min_eigenvalue = 0.0;
  double trace = 0.0;
  bool finite = true;
  bool square = true;

  bool ok(const DensityTolerances& tol = {}) const;
  /// One line per violated invariant, naming it and the measured value.
  std::string violations(const DensityTolerances& tol = {}) const;
};

DensityReport inspect_density(const Matrix& A);

/// Real symmetric PSD trace-one operator on ℝⁿ⊗ℝᵐ (an nm x nm matrix).
class DensityMatrix {
 public:
  /// Throws SizeError if A is not (n·m) x (n·m) and ValidationError listing
  /// each violated invariant otherwise.
  DensityMatrix(Eigen::Index dim_a, Eigen::Index dim_b, Matrix A,
                const DensityTolerances& tol = {});

  Eigen::Index dim_a() const { return dim_a_; }
  Eigen::Index dim_b() const { return dim_b_; }
  Eigen::Index dim() const { return value_.rows(); }
  const Matrix& value() const { return value_; }

 private:
  Eigen::Index dim_a_;
  Eigen::Index dim_b_;
  Matrix value_;
};

}  // namespace qcflow
