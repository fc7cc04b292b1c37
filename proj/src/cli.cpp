#include "qcflow/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcflow/errors.hpp"
#include "qcflow/io.hpp"
#include "qcflow/states.hpp"

namespace qcflow::cli {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

json config_json(const FlowConfig& c) {
  return json{{"abs_tol", c.abs_tol},         {"rel_tol", c.rel_tol},
              {"t_max", c.t_max},             {"grad_tol", c.grad_tol},
              {"discard_eps", c.discard_eps}, {"drift_tol", c.drift_tol},
              {"record_stride", "every accepted step"}};
}

void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const std::vector<std::string>& argv, std::uint64_t seed,
                    const FlowConfig& cfg, json dims, Clock::time_point start) {
  const double wall = std::chrono::duration<double>(Clock::now() - start).count();
  json j{{"command", command},
         {"argv", argv},
         {"seed", seed},
         {"config", config_json(cfg)},
         {"dims", std::move(dims)},
         {"version", kVersion},
         {"wall_time_seconds", wall}};
  io::write_file(dir / "manifest.json", j.dump(2) + "\n");
}

int exit_code_for(TerminationReason r) {
  switch (r) {
    case TerminationReason::Stationarity: return kOk;
    case TerminationReason::Horizon: return kHorizon;
    case TerminationReason::StepStall: return kStalled;
  }
  return kError;
}

TerminationReason parse_reason(const std::string& s) {
  if (s == "stationarity") return TerminationReason::Stationarity;
  if (s == "horizon") return TerminationReason::Horizon;
  return TerminationReason::StepStall;
}

template <typename F>
std::string render(F&& f) {
  std::ostringstream os;
  f(os);
  return os.str();
}

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single value
};

Stats stats_of(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

}  // namespace

int cmd_decompose(const DecomposeOptions& opt, std::ostream& log,
                  const std::vector<std::string>& argv) {
  const auto start = Clock::now();
  const states::GroundTruth truth = states::random_cc_state(opt.n, opt.m, opt.rank, opt.seed);
  Rng rng = substream(opt.seed, "init", 0);
  const CCFactorization init =
      states::random_initialization(opt.n, opt.m, opt.init_rank, rng);
  const FlowResult res = flow::integrate(truth.rho, init, opt.flow);

  io::write_file(opt.out / "trajectory.csv",
                 render([&](std::ostream& os) { io::write_trajectory_csv(os, res.trajectory); }));
  io::write_file(opt.out / "events.csv",
                 render([&](std::ostream& os) { io::write_events_csv(os, res.trajectory); }));
  write_manifest(opt.out, "decompose", argv, opt.seed, opt.flow,
                 json{{"n", opt.n}, {"m", opt.m}, {"rank", opt.rank}, {"init_rank", opt.init_rank}},
                 start);

  log << std::setprecision(17);
  log << "final objective: " << objective::objective_value(truth.rho, res.factorization) << '\n'
      << "surviving rank: " << res.factorization.rank() << '\n'
      << "discards: " << res.trajectory.count(EventKind::Discard) << '\n'
      << "termination: " << to_string(res.reason) << " at t = " << res.trajectory.samples.back().t
      << '\n';
  return exit_code_for(res.reason);
}

int cmd_consistency(const ConsistencyOptions& opt, std::ostream& log,
                    const std::vector<std::string>& argv) {
  const auto start = Clock::now();
  const Eigen::Index rank = opt.target_rank.value_or(opt.n * opt.m);
  const Eigen::Index N = opt.N.value_or(std::min(opt.n, opt.m));
  const DensityMatrix rho = states::random_density(opt.n, opt.m, rank, opt.seed);
  const QuantumnessResult res =
      states::quantumness(rho, N, opt.trials, opt.flow, opt.seed, opt.workers, true);

  std::vector<double> finals;
  double max_sum_err = 0.0;
  std::ostringstream curves, trials;
  curves << "trial,t,objective,theta_sum\n";
  trials << "trial,final_objective,reason,final_rank,max_theta_sum_error\n";
  for (std::size_t k = 0; k < res.per_restart.size(); ++k) {
    const RestartOutcome& o = res.per_restart[k];
    double trial_err = 0.0;
    if (o.trajectory) {
      for (const auto& s : o.trajectory->samples) {
        curves << k << ',' << io::format_number(s.t) << ',' << io::format_number(s.objective)
               << ',' << io::format_number(s.theta_sum) << '\n';
      }
      trial_err = o.trajectory->max_theta_sum_error();
    }
    max_sum_err = std::max(max_sum_err, trial_err);
    if (o.ok) finals.push_back(o.objective);
    std::string reason = o.reason;
    std::replace(reason.begin(), reason.end(), ',', ';');
    std::replace(reason.begin(), reason.end(), '\n', ' ');
    trials << k << ',' << io::format_number(o.objective) << ',' << reason << ','
           << o.final_rank << ',' << io::format_number(trial_err) << '\n';
  }
  io::write_file(opt.out / "curves.csv", curves.str());
  io::write_file(opt.out / "trials.csv", trials.str());
  write_manifest(opt.out, "consistency", argv, opt.seed, opt.flow,
                 json{{"n", opt.n}, {"m", opt.m}, {"target_rank", rank}, {"N", N},
                      {"trials", opt.trials}},
                 start);

  const Stats st = stats_of(finals);
  log << std::setprecision(17);
  log << "trials: " << opt.trials << " (" << finals.size() << " completed)\n"
      << "mean final objective: " << st.mean << '\n'
      << "std final objective: " << st.stddev << '\n'
      << "relative std: " << (st.mean > 0.0 ? st.stddev / st.mean : 0.0) << '\n'
      << "max |sum(theta) - 1|: " << max_sum_err << '\n';
  return finals.size() == opt.trials ? kOk : kError;
}

int cmd_ranksweep(const RankSweepOptions& opt, std::ostream& log,
                  const std::vector<std::string>& argv) {
  const auto start = Clock::now();
  const auto pairs = states::factor_pairs(opt.dim);
  const DensityMatrix rho =
      states::random_density(pairs.front().first, pairs.front().second, opt.dim, opt.seed);
  const std::vector<SweepRow> rows =
      states::rank_sweep(rho.value(), opt.restarts, opt.flow, opt.seed, opt.workers);

  io::write_file(opt.out / "sweep.csv",
                 render([&](std::ostream& os) { io::write_sweep_csv(os, rows); }));
  write_manifest(opt.out, "ranksweep", argv, opt.seed, opt.flow,
                 json{{"dim", opt.dim}, {"restarts", opt.restarts}}, start);

  const SweepRow& best = rows.front();
  log << std::setprecision(17);
  log << "cells: " << rows.size() << '\n'
      << "best: n=" << best.n << " m=" << best.m << " r=" << best.r
      << " objective=" << best.best_objective << '\n';
  return kOk;
}

int cmd_quantify(const QuantifyOptions& opt, std::ostream& log,
                 const std::vector<std::string>& argv) {
  const auto start = Clock::now();
  io::DensityInput in = io::read_density_file(opt.input);
  Eigen::Index n = opt.n ? opt.n : in.n;
  Eigen::Index m = opt.m ? opt.m : in.m;
  if (n < 1 || m < 1) throw SizeError("quantify: --n and --m are required");
  if ((in.n && in.n != n) || (in.m && in.m != m)) {
    throw SizeError("quantify: --n/--m disagree with the dimensions stored in the input file");
  }
  if (in.value.rows() != n * m || in.value.cols() != n * m) {
    throw SizeError("quantify: input is " + std::to_string(in.value.rows()) + "x" +
                    std::to_string(in.value.cols()) + " but n*m = " + std::to_string(n * m));
  }
  const DensityTolerances tol;
  const DensityReport report = inspect_density(in.value);
  log << std::setprecision(17);
  log << "input check: symmetry error " << report.symmetry_error << " (tol " << tol.symmetry
      << "), min eigenvalue " << report.min_eigenvalue << " (tol -" << tol.eigenvalue
      << "), trace " << report.trace << " (tol " << tol.trace << ")\n";
  if (auto v = report.violations(tol); !v.empty()) {
    throw ValidationError("quantify: input is not a density matrix\n" + v);
  }
  const DensityMatrix rho(n, m, std::move(in.value), tol);
  const Eigen::Index N = opt.N.value_or(std::min(n, m));
  const QuantumnessResult res =
      states::quantumness(rho, N, opt.restarts, opt.flow, opt.seed, opt.workers);

  io::write_file(opt.out / "U.csv",
                 render([&](std::ostream& os) { io::write_matrix_csv(os, res.best.U().value()); }));
  io::write_file(opt.out / "V.csv",
                 render([&](std::ostream& os) { io::write_matrix_csv(os, res.best.V().value()); }));
  io::write_file(opt.out / "theta.csv",
                 render([&](std::ostream& os) { io::write_matrix_csv(os, res.best.theta()); }));
  std::ostringstream restarts;
  restarts << "restart,final_objective,reason,final_rank\n";
  for (std::size_t k = 0; k < res.per_restart.size(); ++k) {
    const auto& o = res.per_restart[k];
    std::string reason = o.reason;
    std::replace(reason.begin(), reason.end(), ',', ';');
    std::replace(reason.begin(), reason.end(), '\n', ' ');
    restarts << k << ',' << io::format_number(o.objective) << ',' << reason << ','
             << o.final_rank << '\n';
  }
  io::write_file(opt.out / "restarts.csv", restarts.str());
  write_manifest(opt.out, "quantify", argv, opt.seed, opt.flow,
                 json{{"n", n}, {"m", m}, {"N", N}, {"restarts", opt.restarts},
                      {"input", opt.input.string()}},
                 start);

  const auto& winner = res.per_restart[res.best_restart];
  log << "q: " << res.q << '\n'
      << "best objective: " << winner.objective << " (restart " << res.best_restart << ", "
      << winner.reason << ")\n"
      << "rank: " << res.best.rank() << '\n';
  return exit_code_for(parse_reason(winner.reason));
}

namespace {

void add_flow_flags(CLI::App* cmd, FlowConfig& cfg) {
  cmd->add_option("--abs-tol", cfg.abs_tol, "absolute integration tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--rel-tol", cfg.rel_tol, "relative integration tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--t-max", cfg.t_max, "integration horizon")->check(CLI::PositiveNumber);
  cmd->add_option("--grad-tol", cfg.grad_tol, "stationarity threshold on the flow speed")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--discard-eps", cfg.discard_eps, "weights at or below this are discarded")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--drift-tol", cfg.drift_tol, "orthonormality drift before a polar repair")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nearest classical-classical state by Stiefel-manifold gradient flow"};
  app.name("qcflow");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;

  DecomposeOptions dec;
  auto* c_dec = app.add_subcommand("decompose", "recover a synthetic classical-classical state");
  c_dec->add_option("--n", dec.n, "dimension of the first factor")->check(CLI::PositiveNumber);
  c_dec->add_option("--m", dec.m, "dimension of the second factor")->check(CLI::PositiveNumber);
  c_dec->add_option("--rank", dec.rank, "rank of the synthetic state")->check(CLI::PositiveNumber);
  c_dec->add_option("--init-rank", dec.init_rank, "number of columns in the initial guess")
      ->check(CLI::PositiveNumber);
  c_dec->add_option("--seed", seed, "run seed (falls back to QN_SEED)");
  c_dec->add_option("--out", dec.out, "output directory");
  add_flow_flags(c_dec, dec.flow);

  ConsistencyOptions con;
  std::string target_rank = "full";
  auto* c_con = app.add_subcommand("consistency", "restart statistics on one random target");
  c_con->add_option("--n", con.n, "dimension of the first factor")->check(CLI::PositiveNumber);
  c_con->add_option("--m", con.m, "dimension of the second factor")->check(CLI::PositiveNumber);
  c_con->add_option("--target-rank", target_rank, "'full' or a positive integer");
  c_con->add_option("--N", con.N, "candidate rank (default min(n, m))")
      ->check(CLI::PositiveNumber);
  c_con->add_option("--trials", con.trials, "number of random restarts")->check(CLI::PositiveNumber);
  c_con->add_option("--workers", con.workers, "threads (0 = hardware concurrency)");
  c_con->add_option("--seed", seed, "run seed (falls back to QN_SEED)");
  c_con->add_option("--out", con.out, "output directory");
  add_flow_flags(c_con, con.flow);

  RankSweepOptions swp;
  auto* c_swp = app.add_subcommand("ranksweep", "objective over all factorizations and ranks");
  c_swp->add_option("--dim", swp.dim, "total dimension D = n*m")->check(CLI::PositiveNumber);
  c_swp->add_option("--restarts", swp.restarts, "random restarts per problem")->check(CLI::PositiveNumber);
  c_swp->add_option("--workers", swp.workers, "threads (0 = hardware concurrency)");
  c_swp->add_option("--seed", seed, "run seed (falls back to QN_SEED)");
  c_swp->add_option("--out", swp.out, "output directory");
  add_flow_flags(c_swp, swp.flow);

  QuantifyOptions qty;
  auto* c_qty = app.add_subcommand("quantify", "distance from a given state to the CC set");
  c_qty->add_option("--input", qty.input, "density matrix (.csv or .json)")->required();
  c_qty->add_option("--n", qty.n, "dimension of the first factor")->check(CLI::PositiveNumber);
  c_qty->add_option("--m", qty.m, "dimension of the second factor")->check(CLI::PositiveNumber);
  c_qty->add_option("--N", qty.N, "candidate rank (default min(n, m))")
      ->check(CLI::PositiveNumber);
  c_qty->add_option("--restarts", qty.restarts, "random restarts per problem")->check(CLI::PositiveNumber);
  c_qty->add_option("--workers", qty.workers, "threads (0 = hardware concurrency)");
  c_qty->add_option("--seed", seed, "run seed (falls back to QN_SEED)");
  c_qty->add_option("--out", qty.out, "output directory");
  add_flow_flags(c_qty, qty.flow);

  std::vector<const char*> argv{"qcflow"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (target_rank != "full") {
      std::size_t used = 0;
      long r = 0;
      try {
        r = std::stol(target_rank, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != target_rank.size() || r < 1) {
        throw CLI::ValidationError("--target-rank", "expected 'full' or a positive integer");
      }
      con.target_rank = r;
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  if (!seed) {
    if (const char* env = std::getenv("QN_SEED")) {
      try {
        std::size_t used = 0;
        seed = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument(env);
      } catch (const std::exception&) {
        err << "QN_SEED is not an unsigned integer: " << env << '\n';
        return kUsage;
      }
    }
  }
  const std::uint64_t s = seed.value_or(0);

  try {
    if (c_dec->parsed()) {
      dec.seed = s;
      return cmd_decompose(dec, out, args);
    }
    if (c_con->parsed()) {
      con.seed = s;
      return cmd_consistency(con, out, args);
    }
    if (c_swp->parsed()) {
      swp.seed = s;
      return cmd_ranksweep(swp, out, args);
    }
    qty.seed = s;
    return cmd_quantify(qty, out, args);
  } catch (const UnsupportedDimensionError& e) {
    err << "unsupported dimension: " << e.what() << '\n';
    return kError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
}

}  // namespace qcflow::cli
