#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qcflow/density_matrix.hpp"
#include "qcflow/flow.hpp"
#include "qcflow/objective.hpp"

namespace qcflow {

struct RestartOutcome {
  double objective = 0.0;  ///< final objective, NaN when the restart failed
  std::string reason;      ///< termination reason or the error message
  Eigen::Index final_rank = 0;
  bool ok = true;
  std::optional<Trajectory> trajectory;           ///< kept only on request
  std::optional<CCFactorization> factorization;  ///< kept only on request
};

struct QuantumnessResult {
  double q = 0.0;  ///< √(2·F*), the Frobenius distance to the best CC state found
  CCFactorization best;
  std::size_t best_restart = 0;
  std::vector<RestartOutcome> per_restart;
  std::size_t restarts = 0;
  Trajectory best_trajectory;
};

struct SweepRow {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  Eigen::Index r = 0;
  double best_objective = 0.0;
  double mean_objective = 0.0;
  std::size_t restarts = 0;
};

namespace states {

struct GroundTruth {
  DensityMatrix rho;
  CCFactorization factorization;
};

/// Synthetic rank-r classical-classical state on ℝⁿ⊗ℝᵐ with random orthonormal
/// factors and weights drawn uniformly from the simplex, floored at 0.01/r.
GroundTruth random_cc_state(Eigen::Index n, Eigen::Index m, Eigen::Index r, std::uint64_t seed);

/// G Gᵀ / tr(G Gᵀ) for an (nm x rank) standard normal G.
DensityMatrix random_density(Eigen::Index n, Eigen::Index m, Eigen::Index rank,
                             std::uint64_t seed);

/// Uniform (Dirichlet(1,…,1)) point in the interior of the N-simplex.
Vector random_simplex(Eigen::Index N, Rng& rng);

/// Random initial factorization for the flow: a random Stiefel pair and simplex weights.
CCFactorization random_initialization(Eigen::Index n, Eigen::Index m, Eigen::Index N, Rng& rng);

/// Best classical-classical approximation over `restarts` random initializations.
/// Restart k draws its initialization from substream ("init", k) of `seed`.
/// Failed restarts are recorded; throws NumericalError only if all of them fail.
/// With `keep_trajectories`, each outcome also carries its trajectory and final factorization.
QuantumnessResult quantumness(const DensityMatrix& rho, Eigen::Index N, std::size_t restarts,
                              const FlowConfig& cfg, std::uint64_t seed,
                              unsigned workers = 0, bool keep_trajectories = false);

/// Ordered pairs (n, m) with n, m >= 2 and n·m = D, in increasing n.
/// Throws UnsupportedDimensionError when there are none (D prime or D < 4).
std::vector<std::pair<Eigen::Index, Eigen::Index>> factor_pairs(Eigen::Index D);

/// Runs quantumness for every factor pair (n, m) of the dimension of `rho` and
/// every rank 1..min(n, m). Rows come back sorted by best objective.
std::vector<SweepRow> rank_sweep(const Matrix& rho, std::size_t restarts, const FlowConfig& cfg,
                                 std::uint64_t seed, unsigned workers = 0);

}  // namespace states
}  // namespace qcflow
