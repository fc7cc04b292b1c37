#include "qcflow/density_matrix.hpp"

#include <cmath>
#include <sstream>

#include "qcflow/errors.hpp"

namespace qcflow {

bool DensityReport::ok(const DensityTolerances& tol) const {
  return violations(tol).empty();
}

std::string DensityReport::violations(const DensityTolerances& tol) const {
  std::ostringstream os;
  os.precision(17);
  if (!square) {
    os << "square: matrix is not square\n";
    return os.str();
  }
  if (!finite) {
    os << "finite: matrix has NaN or Inf entries\n";
    return os.str();
  }
  if (!(symmetry_error <= tol.symmetry)) {
    os << "symmetry: max |A - A^T| = " << symmetry_error << " (tolerance " << tol.symmetry
       << ")\n";
  }
  if (!(min_eigenvalue >= -tol.eigenvalue)) {
    os << "positive semidefinite: smallest eigenvalue = " << min_eigenvalue << " (tolerance -"
       << tol.eigenvalue << ")\n";
  }
  if (!(std::abs(trace - 1.0) <= tol.trace)) {
    os << "trace: trace = " << trace << ", expected 1 (tolerance " << tol.trace << ")\n";
  }
  return os.str();
}

DensityReport inspect_density(const Matrix& A) {
  DensityReport r;
  r.square = A.rows() == A.cols() && A.rows() > 0;
  if (!r.square) return r;
  r.finite = A.allFinite();
  if (!r.finite) return r;
  r.symmetry_error = (A - A.transpose()).cwiseAbs().maxCoeff();
  r.trace = A.trace();
  const Matrix sym = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  r.min_eigenvalue = eig.eigenvalues().minCoeff();
  return r;
}

DensityMatrix::DensityMatrix(Eigen::Index dim_a, Eigen::Index dim_b, Matrix A,
                             const DensityTolerances& tol)
    : dim_a_(dim_a), dim_b_(dim_b), value_(std::move(A)) {
  if (dim_a < 1 || dim_b < 1 || value_.rows() != dim_a * dim_b ||
      value_.cols() != dim_a * dim_b) {
    throw SizeError("DensityMatrix: a " + std::to_string(value_.rows()) + "x" +
                    std::to_string(value_.cols()) + " matrix does not act on R^" +
                    std::to_string(dim_a) + " (x) R^" + std::to_string(dim_b));
  }
  const DensityReport report = inspect_density(value_);
  if (auto v = report.violations(tol); !v.empty()) {
    throw ValidationError("DensityMatrix: invariant violated\n" + v);
  }
}

}  // namespace qcflow
