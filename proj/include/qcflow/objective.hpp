#pragma once

#include "qcflow/density_matrix.hpp"
#include "qcflow/linalg.hpp"
#include "qcflow/stiefel.hpp"

namespace qcflow {

/// Candidate classical-classical state (U ⊙ V)·diag(θ)·(U ⊙ V)ᵀ.
///
/// U (n x N) and V (m x N) have orthonormal columns; θ is a probability vector
/// with every entry in (0, 1].
class CCFactorization {
 public:
  static constexpr double kThetaSumTol = 1e-10;

  /// Throws SizeError on mismatched column counts and ValidationError when θ
  /// leaves the simplex.
  CCFactorization(StiefelPoint U, StiefelPoint V, Vector theta);

  const StiefelPoint& U() const { return U_; }
  const StiefelPoint& V() const { return V_; }
  const Vector& theta() const { return theta_; }
  Eigen::Index n() const { return U_.rows(); }
  Eigen::Index m() const { return V_.rows(); }
  Eigen::Index rank() const { return theta_.size(); }

 private:
  StiefelPoint U_;
  StiefelPoint V_;
  Vector theta_;
};

/// Partial derivatives of the objective plus its value.
struct GradientBundle {
  Matrix dU;
  Matrix dV;
  Vector dTheta;
  double value = 0.0;
};

namespace objective {

/// Intermediates of one gradient evaluation, on raw (possibly drifted) factors.
struct Evaluation {
  Matrix Z;        ///< U ⊙ V
  Matrix M_tilde;  ///< reshape(Mᵀ vec(ρ Z Σ), n, N)
  Matrix M_hat;    ///< reshape(Mᵀ vec(Z Σ²), n, N)
  Matrix N_tilde;  ///< reshape(Nᵀ vec(ρ Z Σ), m, N)
  Matrix N_hat;    ///< reshape(Nᵀ vec(Z Σ²), m, N)
  Vector e;        ///< eᵢ = θᵢ − zᵢᵀ ρ zᵢ
};

/// Raw-matrix evaluation used by the flow, where U and V carry integrator drift.
Evaluation evaluate(const Matrix& rho, const Matrix& U, const Matrix& V, const Vector& theta);

/// ½‖ρ − (U⊙V) diag(θ) (U⊙V)ᵀ‖²_F on raw factors.
double value_raw(const Matrix& rho, const Matrix& U, const Matrix& V, const Vector& theta);

Matrix cc_state(const CCFactorization& f);

double objective_value(const DensityMatrix& rho, const CCFactorization& f);

/// Euclidean partials:
///   ∂F/∂U = −2(M̃ − M̂),  ∂F/∂V = −2(Ñ − N̂),  ∂F/∂θᵢ = eᵢ = θᵢ − zᵢᵀρzᵢ.
/// The θ form uses the mutual orthonormality of the columns zᵢ = xᵢ ⊗ yᵢ.
GradientBundle gradient(const DensityMatrix& rho, const CCFactorization& f);

/// dU and dV projected with the canonical-metric Riemannian gradient; dTheta
/// keeps the raw residuals eᵢ (centering happens when the flow is assembled).
GradientBundle riemannian_bundle(const DensityMatrix& rho, const CCFactorization& f);

/// max(‖Uᵀ(M̃−M̂) − (M̃−M̂)ᵀU‖_F, ‖Vᵀ(Ñ−N̂) − (Ñ−N̂)ᵀV‖_F, ‖e − mean(e)‖₂).
double stationarity_residual(const DensityMatrix& rho, const CCFactorization& f);

}  // namespace objective
}  // namespace qcflow
