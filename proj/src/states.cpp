#include "qcflow/states.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <thread>

#include "qcflow/errors.hpp"

namespace qcflow::states {

namespace {

// Runs body(0..count-1) on up to `workers` threads. Each index owns its output slot.
template <typename Body>
void parallel_for(std::size_t count, unsigned workers, Body body) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

Vector random_simplex(Eigen::Index N, Rng& rng) {
  if (N < 1) throw SizeError("random_simplex: N must be positive");
  std::exponential_distribution<double> expo(1.0);
  Vector w(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    do {
      w[i] = expo(rng);
    } while (!(w[i] > 0.0));
  }
  return w / w.sum();
}

GroundTruth random_cc_state(Eigen::Index n, Eigen::Index m, Eigen::Index r, std::uint64_t seed) {
  if (r < 1 || r > std::min(n, m)) {
    throw SizeError("random_cc_state: rank " + std::to_string(r) + " must lie in [1, min(" +
                    std::to_string(n) + ", " + std::to_string(m) + ")]");
  }
  Rng rng = substream(seed, "cc_state");
  StiefelPoint U = stiefel::random_stiefel(n, r, rng);
  StiefelPoint V = stiefel::random_stiefel(m, r, rng);
  const double floor = 0.01 / static_cast<double>(r);
  Vector theta = (floor + (1.0 - floor * static_cast<double>(r)) *
                              random_simplex(r, rng).array()).matrix();
  theta /= theta.sum();
  CCFactorization f(std::move(U), std::move(V), std::move(theta));
  Matrix sigma = objective::cc_state(f);
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  return GroundTruth{DensityMatrix(n, m, std::move(sigma)), std::move(f)};
}

DensityMatrix random_density(Eigen::Index n, Eigen::Index m, Eigen::Index rank,
                             std::uint64_t seed) {
  const Eigen::Index D = n * m;
  if (n < 1 || m < 1 || rank < 1 || rank > D) {
    throw SizeError("random_density: rank " + std::to_string(rank) + " must lie in [1, " +
                    std::to_string(D) + "]");
  }
  Rng rng = substream(seed, "density");
  std::normal_distribution<double> normal;
  Matrix G(D, rank);
  for (Eigen::Index j = 0; j < rank; ++j) {
    for (Eigen::Index i = 0; i < D; ++i) G(i, j) = normal(rng);
  }
  Matrix A = G * G.transpose();
  A = 0.5 * (A + A.transpose()).eval();
  A /= A.trace();
  return DensityMatrix(n, m, std::move(A));
}

CCFactorization random_initialization(Eigen::Index n, Eigen::Index m, Eigen::Index N, Rng& rng) {
  StiefelPoint U = stiefel::random_stiefel(n, N, rng);
  StiefelPoint V = stiefel::random_stiefel(m, N, rng);
  return CCFactorization(std::move(U), std::move(V), random_simplex(N, rng));
}

QuantumnessResult quantumness(const DensityMatrix& rho, Eigen::Index N, std::size_t restarts,
                              const FlowConfig& cfg, std::uint64_t seed, unsigned workers,
                              bool keep_trajectories) {
  if (N < 1 || N > std::min(rho.dim_a(), rho.dim_b())) {
    throw SizeError("quantumness: candidate rank " + std::to_string(N) + " must lie in [1, " +
                    std::to_string(std::min(rho.dim_a(), rho.dim_b())) + "]");
  }
  if (restarts < 1) throw ValidationError("quantumness: need at least one restart");
  cfg.validate();

  std::vector<std::optional<FlowResult>> results(restarts);
  std::vector<RestartOutcome> outcomes(restarts);
  parallel_for(restarts, workers, [&](std::size_t k) {
    try {
      Rng rng = substream(seed, "init", k);
      const CCFactorization init = random_initialization(rho.dim_a(), rho.dim_b(), N, rng);
      FlowResult res = flow::integrate(rho, init, cfg);
      outcomes[k].objective = objective::objective_value(rho, res.factorization);
      outcomes[k].reason = to_string(res.reason);
      outcomes[k].final_rank = res.factorization.rank();
      if (keep_trajectories) {
        outcomes[k].trajectory = res.trajectory;
        outcomes[k].factorization = res.factorization;
      }
      results[k] = std::move(res);
    } catch (const Error& e) {
      outcomes[k].ok = false;
      outcomes[k].objective = std::numeric_limits<double>::quiet_NaN();
      outcomes[k].reason = e.what();
      if (const auto* ie = dynamic_cast<const IntegrationError*>(&e); ie && keep_trajectories) {
        outcomes[k].trajectory = ie->trajectory();
      }
    }
  });

  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < restarts; ++k) {
    if (!outcomes[k].ok) continue;
    if (!best || outcomes[k].objective < outcomes[*best].objective) best = k;
  }
  if (!best) {
    throw NumericalError("quantumness: all " + std::to_string(restarts) +
                         " restarts failed; first error: " + outcomes.front().reason);
  }
  FlowResult& winner = *results[*best];
  const double q = std::sqrt(2.0 * std::max(0.0, outcomes[*best].objective));
  return QuantumnessResult{q,        std::move(winner.factorization), *best,
                           outcomes, restarts,                        std::move(winner.trajectory)};
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> factor_pairs(Eigen::Index D) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index n = 2; n <= D / 2; ++n) {
    if (D % n == 0 && D / n >= 2) pairs.emplace_back(n, D / n);
  }
  if (pairs.empty()) {
    throw UnsupportedDimensionError("rank_sweep: dimension " + std::to_string(D) +
                                    " has no factorization n*m with n, m >= 2");
  }
  return pairs;
}

std::vector<SweepRow> rank_sweep(const Matrix& rho, std::size_t restarts, const FlowConfig& cfg,
                                 std::uint64_t seed, unsigned workers) {
  if (rho.rows() != rho.cols()) throw SizeError("rank_sweep: density matrix is not square");
  const auto pairs = factor_pairs(rho.rows());

  struct Cell {
    Eigen::Index n, m, r;
  };
  std::vector<Cell> cells;
  for (const auto& [n, m] : pairs) {
    for (Eigen::Index r = 1; r <= std::min(n, m); ++r) cells.push_back({n, m, r});
  }

  std::vector<SweepRow> rows(cells.size());
  std::vector<std::string> errors(cells.size());
  parallel_for(cells.size(), workers, [&](std::size_t c) {
    const auto [n, m, r] = cells[c];
    const DensityMatrix state(n, m, rho);
    // Cells share no RNG state: each gets its own seed from the ("sweep", n, r) substream.
    Rng cell_rng = substream(seed, "sweep", static_cast<std::uint64_t>(n * 4096 + r));
    const std::uint64_t cell_seed = cell_rng();
    try {
      const QuantumnessResult res = quantumness(state, r, restarts, cfg, cell_seed, 1);
      double sum = 0.0;
      std::size_t ok = 0;
      for (const auto& o : res.per_restart) {
        if (o.ok) {
          sum += o.objective;
          ++ok;
        }
      }
      rows[c] = SweepRow{n, m, r, res.per_restart[res.best_restart].objective,
                         sum / static_cast<double>(ok), restarts};
    } catch (const Error& e) {
      errors[c] = e.what();
    }
  });
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (!errors[c].empty()) throw NumericalError("rank_sweep: " + errors[c]);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.best_objective < b.best_objective;
  });
  return rows;
}

}  // namespace qcflow::states
