// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qcflow/cli.hpp"
#include "qcflow/states.hpp"

using namespace qcflow;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] %d. %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool descends(const Trajectory& traj, const FlowConfig& cfg) {
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    const double prev = traj.samples[k - 1].objective;
    if (traj.samples[k].objective > prev + 10.0 * std::max(cfg.abs_tol, cfg.rel_tol * prev)) {
      return false;
    }
  }
  return true;
}

struct StationarityTally {
  int checked = 0;
  double worst = 0.0;
  void add(const DensityMatrix& rho, const CCFactorization& f) {
    ++checked;
    worst = std::max(worst, objective::stationarity_residual(rho, f));
  }
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int main() {
  const FlowConfig cfg;  // defaults: AbsTol = RelTol = 1e-12
  double max_sum_error = 0.0;
  StationarityTally stationarity;

  // 1 and 3: rank-3 CC state on R^16 (x) R^8, initial rank 8, seeds 1..10.
  {
    int recovered = 0;
    double worst_ortho = 0.0, slowest = 0.0, worst_obj = 0.0;
    std::size_t repairs = 0;
    std::string per_seed;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto truth = states::random_cc_state(16, 8, 3, seed);
      Rng rng = substream(seed, "init", 0);
      const CCFactorization init = states::random_initialization(16, 8, 8, rng);
      const auto t0 = Clock::now();
      const FlowResult res = flow::integrate(truth.rho, init, cfg);
      slowest = std::max(slowest, seconds_since(t0));
      const double obj = objective::objective_value(truth.rho, res.factorization);
      const std::size_t discards = res.trajectory.count(EventKind::Discard);
      const bool ok = res.factorization.rank() == 3 && obj <= 1e-8 && discards == 5;
      if (ok) ++recovered;
      worst_obj = std::max(worst_obj, obj);
      per_seed += ok ? "+" : "-";
      worst_ortho = std::max(worst_ortho, res.trajectory.max_ortho_residual());
      repairs += res.trajectory.count(EventKind::Reorthonormalize);
      max_sum_error = std::max(max_sum_error, res.trajectory.max_theta_sum_error());
      if (res.reason == TerminationReason::Stationarity) stationarity.add(truth.rho, res.factorization);
    }
    report(1, "decomposition recovery", recovered >= 9 && slowest <= 60.0,
           std::to_string(recovered) + "/10 runs with rank 3, objective <= 1e-8 and 5 discards [" +
               per_seed + "]; worst objective " + fmt("%.3e", worst_obj) + "; slowest run " +
               fmt("%.2f", slowest) + " s (limit 60 s)");
    report(3, "manifold preservation", worst_ortho <= 1e-8 && repairs == 0,
           "max orthonormality residual " + fmt("%.3e", worst_ortho) + " (limit 1e-8), " +
               std::to_string(repairs) + " drift repairs (limit 0)");
  }

  // 4: consistency over 10 restarts on a fixed random 40 x 40 rank-3 target.
  {
    const DensityMatrix rho = states::random_density(8, 5, 3, 2024);
    const QuantumnessResult res = states::quantumness(rho, 5, 10, cfg, 2024, 0, true);
    std::vector<double> finals;
    bool all_descend = true;
    for (const auto& o : res.per_restart) {
      if (!o.ok) continue;
      finals.push_back(o.objective);
      all_descend = all_descend && descends(*o.trajectory, cfg);
      max_sum_error = std::max(max_sum_error, o.trajectory->max_theta_sum_error());
      if (o.reason == "stationarity") stationarity.add(rho, *o.factorization);
    }
    double mean = 0.0;
    for (double v : finals) mean += v;
    mean /= static_cast<double>(finals.size());
    double ss = 0.0;
    for (double v : finals) ss += (v - mean) * (v - mean);
    const double rel_std =
        finals.size() > 1 ? std::sqrt(ss / static_cast<double>(finals.size() - 1)) / mean : 0.0;
    report(4, "consistency", finals.size() == 10 && rel_std <= 1e-3 && all_descend,
           std::to_string(finals.size()) + "/10 trials completed; mean objective " +
               fmt("%.10e", mean) + ", relative std " + fmt("%.3e", rel_std) +
               " (limit 1e-3); objective curves non-increasing: " + (all_descend ? "yes" : "no"));

    // Reported for reference only: the full-rank target of the same experiment.
    const DensityMatrix full = states::random_density(8, 5, 40, 2024);
    const QuantumnessResult rf = states::quantumness(full, 5, 10, cfg, 2024, 0, true);
    std::vector<double> ff;
    for (const auto& o : rf.per_restart) {
      if (!o.ok) continue;
      ff.push_back(o.objective);
      max_sum_error = std::max(max_sum_error, o.trajectory->max_theta_sum_error());
    }
    const double fmean = [&] {
      double s = 0.0;
      for (double v : ff) s += v;
      return s / static_cast<double>(ff.size());
    }();
    double fss = 0.0;
    for (double v : ff) fss += (v - fmean) * (v - fmean);
    std::printf("[INFO] 4. full-rank 40 x 40 target: mean objective %.10e, relative std %.3e, "
                "min %.10e, max %.10e\n",
                fmean, std::sqrt(fss / static_cast<double>(ff.size() - 1)) / fmean,
                *std::min_element(ff.begin(), ff.end()), *std::max_element(ff.begin(), ff.end()));
  }

  report(2, "sum-to-one preservation", max_sum_error <= 1e-10,
         "max |sum(theta) - 1| over all samples of criteria 1-4 runs " +
             fmt("%.3e", max_sum_error) + " (limit 1e-10)");

  // 5: rank sweep over D = 60 with 5 restarts per cell.
  {
    const auto t0 = Clock::now();
    const DensityMatrix rho = states::random_density(2, 30, 60, 60);
    const std::vector<SweepRow> rows = states::rank_sweep(rho.value(), 5, cfg, 60);
    const double elapsed = seconds_since(t0);
    std::map<std::pair<Eigen::Index, Eigen::Index>, std::map<Eigen::Index, double>> by_pair;
    bool has_15_4_4 = false;
    for (const auto& r : rows) {
      by_pair[{r.n, r.m}][r.r] = r.best_objective;
      has_15_4_4 = has_15_4_4 || (r.n == 15 && r.m == 4 && r.r == 4);
    }
    int violations = 0;
    for (const auto& [pair, by_r] : by_pair) {
      double prev = INFINITY;
      for (const auto& [r, obj] : by_r) {
        if (obj > prev) ++violations;
        prev = obj;
      }
    }
    report(5, "rank-sweep monotonicity", violations == 0 && has_15_4_4 && elapsed <= 900.0,
           std::to_string(by_pair.size()) + " factor pairs, " + std::to_string(rows.size()) +
               " cells, " + std::to_string(violations) + " monotonicity violations; (15,4,4) " +
               (has_15_4_4 ? "present" : "missing") + "; best cell (" +
               std::to_string(rows.front().n) + "," + std::to_string(rows.front().m) + "," +
               std::to_string(rows.front().r) + ") objective " +
               fmt("%.6e", rows.front().best_objective) + "; " + fmt("%.1f", elapsed) +
               " s (limit 900 s)");
  }

  // 6: gradient against central differences and the explicit M/N route.
  {
    std::mt19937_64 gen(606);
    double worst_fd = 0.0, worst_mn = 0.0;
    bool fd_ok = true;
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::Index n = 2 + trial % 4, m = 2 + (trial / 2) % 3;
      const Eigen::Index N = 1 + trial % std::min<Eigen::Index>({3, n, m});
      const Matrix U = oracle::random_orthonormal(n, N, gen);
      const Matrix V = oracle::random_orthonormal(m, N, gen);
      const Vector th = oracle::random_weights(N, gen);
      const Matrix rho_m = oracle::random_density(n * m, gen);
      const DensityMatrix rho(n, m, rho_m);
      const CCFactorization f{StiefelPoint(U), StiefelPoint(V), th};
      const GradientBundle g = objective::gradient(rho, f);
      const double h = 1e-6;
      const Matrix fdU = oracle::central_difference(
          [&](const Matrix& X) { return oracle::objective(rho_m, X, V, th); }, U, h);
      const Matrix fdV = oracle::central_difference(
          [&](const Matrix& Y) { return oracle::objective(rho_m, U, Y, th); }, V, h);
      const Matrix fdT = oracle::central_difference(
          [&](const Matrix& t) { return oracle::objective(rho_m, U, V, Vector(t)); }, Matrix(th),
          h);
      const auto check = [&](const Matrix& got, const Matrix& want) {
        for (Eigen::Index i = 0; i < got.size(); ++i) {
          const double err = std::abs(got.data()[i] - want.data()[i]);
          const double tol = std::max(1e-5 * std::abs(want.data()[i]), 1e-8);
          if (err > tol) fd_ok = false;
          worst_fd = std::max(worst_fd, err / tol);
        }
      };
      check(g.dU, fdU);
      check(g.dV, fdV);
      check(Matrix(g.dTheta), fdT);

      const Matrix Z = oracle::khatri_rao(U, V);
      const Matrix S = th.asDiagonal();
      const Vector d = oracle::vec(rho_m * Z * S) - oracle::vec(Z * S * S);
      const Matrix dU = -2.0 * linalg::reshape(linalg::build_M_explicit(V, n).transpose() * d, n, N);
      const Matrix dV = -2.0 * linalg::reshape(linalg::build_N_explicit(U, m).transpose() * d, m, N);
      worst_mn = std::max(worst_mn, (g.dU - dU).norm() / std::max(dU.norm(), 1e-300));
      worst_mn = std::max(worst_mn, (g.dV - dV).norm() / std::max(dV.norm(), 1e-300));
    }
    report(6, "gradient correctness", fd_ok && worst_mn <= 1e-12,
           "20 instances; worst finite-difference error / tolerance " +
               fmt("%.3e", worst_fd) + " (limit 1, tolerance max(1e-5 |ref|, 1e-8)); implicit vs explicit M/N " +
               fmt("%.3e", worst_mn) + " (limit 1e-12)");
  }

  // 7: stationarity at exit and descent direction.
  {
    std::mt19937_64 gen(707);
    int ascent = 0;
    double worst_dot = -INFINITY;
    for (int k = 0; k < 50; ++k) {
      const Eigen::Index n = 2 + k % 5, m = 2 + k % 4;
      const Eigen::Index N = 1 + k % std::min(n, m);
      const CCFactorization f{StiefelPoint(oracle::random_orthonormal(n, N, gen)),
                              StiefelPoint(oracle::random_orthonormal(m, N, gen)),
                              oracle::random_weights(N, gen)};
      const DensityMatrix rho(n, m, oracle::random_density(n * m, gen));
      const FlowState v = flow::rhs(FlowState::pack(f), rho);
      const GradientBundle g = objective::gradient(rho, f);
      const double dot = linalg::frobenius_inner(g.dU, v.U()) +
                         linalg::frobenius_inner(g.dV, v.V()) + g.dTheta.dot(v.theta());
      worst_dot = std::max(worst_dot, dot);
      if (dot > 0.0) ++ascent;
    }
    report(7, "stationarity and descent",
           stationarity.checked > 0 && stationarity.worst <= 10.0 * cfg.grad_tol && ascent == 0,
           std::to_string(stationarity.checked) +
               " stationarity exits, worst residual " + fmt("%.3e", stationarity.worst) +
               " (limit " + fmt("%.0e", 10.0 * cfg.grad_tol) + "); max <gradient, rhs> over 50 states " +
               fmt("%.3e", worst_dot) + " (limit 0)");
  }

  // 8: identical command, seed and config give byte-identical CSV.
  {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "qcflow_acceptance";
    fs::remove_all(base);
    std::ostringstream sink;
    const auto decompose = [&](const std::string& dir) {
      return cli::run({"decompose", "--n", "16", "--m", "8", "--rank", "3", "--init-rank", "8",
                       "--seed", "1", "--out", (base / dir).string()},
                      sink, sink);
    };
    const auto consistency = [&](const std::string& dir) {
      return cli::run({"consistency", "--n", "4", "--m", "3", "--target-rank", "3", "--trials",
                       "3", "--seed", "5", "--out", (base / dir).string()},
                      sink, sink);
    };
    const int c1 = decompose("d1"), c2 = decompose("d2");
    const int c3 = consistency("c1"), c4 = consistency("c2");
    bool same = c1 == c2 && c3 == c4;
    int files = 0;
    for (const auto& [a, b, name] :
         std::vector<std::tuple<std::string, std::string, std::string>>{
             {"d1", "d2", "trajectory.csv"}, {"d1", "d2", "events.csv"},
             {"c1", "c2", "curves.csv"},     {"c1", "c2", "trials.csv"}}) {
      const std::string x = slurp(base / a / name), y = slurp(base / b / name);
      same = same && !x.empty() && x == y;
      ++files;
    }
    fs::remove_all(base);
    report(8, "determinism", same,
           std::to_string(files) + " CSV files compared across repeated decompose/consistency runs");
  }

  std::printf("%s: %d criterion failure(s)\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
