#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qcflow/flow.hpp"
#include "qcflow/linalg.hpp"
#include "qcflow/states.hpp"

namespace qcflow::io {

/// Shortest decimal form that round-trips a double ("%.17g"); empty for NaN.
std::string format_number(double v);

/// Header: t,objective,theta_sum,grad_norm,ortho_u,ortho_v,theta_1..theta_N.
/// Discarded weights are written as empty fields.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Header: t,kind,detail.
void write_events_csv(std::ostream& os, const Trajectory& traj);

/// Header: n,m,r,best_objective,mean_objective,restarts.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

/// Dense matrix, one comma-separated row per line.
void write_matrix_csv(std::ostream& os, const Matrix& A);

/// Reads a dense CSV matrix. Blank lines are skipped; every row must have the
/// same number of fields. Throws ValidationError on malformed input.
Matrix read_matrix_csv(std::istream& is);

struct DensityInput {
  Matrix value;
  Eigen::Index n = 0;  ///< 0 when the file does not say
  Eigen::Index m = 0;
};

/// Loads a matrix from `path`: JSON {"n":..,"m":..,"data":[[..],..]} when the
/// extension is .json, dense CSV otherwise.
DensityInput read_density_file(const std::filesystem::path& path);

/// Writes `contents` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace qcflow::io
