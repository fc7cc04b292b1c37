#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qcflow/flow.hpp"

namespace qcflow::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,       ///< finished (stationarity for single runs)
  kError = 1,    ///< runtime or validation failure
  kHorizon = 2,  ///< integration reached t_max before stationarity
  kStalled = 3,  ///< step size collapsed; the problem looks stiff at these tolerances
  kUsage = 64,   ///< bad command line
};

struct DecomposeOptions {
  Eigen::Index n = 16;
  Eigen::Index m = 8;
  Eigen::Index rank = 3;
  Eigen::Index init_rank = 8;
  std::uint64_t seed = 0;
  std::filesystem::path out = "decompose_out";
  FlowConfig flow;
};

struct ConsistencyOptions {
  Eigen::Index n = 8;
  Eigen::Index m = 5;
  std::optional<Eigen::Index> target_rank;  ///< empty means full rank
  std::optional<Eigen::Index> N;            ///< defaults to min(n, m)
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  std::filesystem::path out = "consistency_out";
  FlowConfig flow;
};

struct RankSweepOptions {
  Eigen::Index dim = 60;
  std::size_t restarts = 5;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  std::filesystem::path out = "ranksweep_out";
  FlowConfig flow;
};

struct QuantifyOptions {
  std::filesystem::path input;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  std::optional<Eigen::Index> N;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  std::filesystem::path out = "quantify_out";
  FlowConfig flow;
};

/// Each command writes its artifacts plus manifest.json under `out` and a short
/// human-readable summary to `log`. They throw qcflow::Error on failure.
int cmd_decompose(const DecomposeOptions& opt, std::ostream& log,
                  const std::vector<std::string>& argv = {});
int cmd_consistency(const ConsistencyOptions& opt, std::ostream& log,
                    const std::vector<std::string>& argv = {});
int cmd_ranksweep(const RankSweepOptions& opt, std::ostream& log,
                  const std::vector<std::string>& argv = {});
int cmd_quantify(const QuantifyOptions& opt, std::ostream& log,
                 const std::vector<std::string>& argv = {});

/// Parses `args` (without the program name), dispatches to a subcommand and
/// maps failures to exit codes. Reads QN_SEED when --seed is absent.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qcflow::cli
