#include "qcflow/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qcflow/errors.hpp"

namespace qcflow::io {

std::string format_number(double v) {
  if (std::isnan(v)) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,objective,theta_sum,grad_norm,ortho_u,ortho_v";
  for (Eigen::Index i = 0; i < traj.initial_rank; ++i) os << ",theta_" << i + 1;
  os << '\n';
  for (const auto& s : traj.samples) {
    os << format_number(s.t) << ',' << format_number(s.objective) << ','
       << format_number(s.theta_sum) << ',' << format_number(s.grad_norm) << ','
       << format_number(s.ortho_u) << ',' << format_number(s.ortho_v);
    for (const auto& th : s.theta) {
      os << ',';
      if (th) os << format_number(*th);
    }
    os << '\n';
  }
}

void write_events_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,kind,detail\n";
  for (const auto& e : traj.events) {
    os << format_number(e.t) << ',' << to_string(e.kind) << ',' << e.detail << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "n,m,r,best_objective,mean_objective,restarts\n";
  for (const auto& r : rows) {
    os << r.n << ',' << r.m << ',' << r.r << ',' << format_number(r.best_objective) << ','
       << format_number(r.mean_objective) << ',' << r.restarts << '\n';
  }
}

void write_matrix_csv(std::ostream& os, const Matrix& A) {
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (j) os << ',';
      os << format_number(A(i, j));
    }
    os << '\n';
  }
}

Matrix read_matrix_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || field.find_first_not_of(" \t\r", used) != std::string::npos) {
        throw ValidationError("read_matrix_csv: line " + std::to_string(line_no) +
                              ": cannot parse '" + field + "' as a number");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ValidationError("read_matrix_csv: line " + std::to_string(line_no) + " has " +
                            std::to_string(row.size()) + " fields, expected " +
                            std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("read_matrix_csv: no data");
  Matrix A(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      A(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return A;
}

DensityInput read_density_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  DensityInput out;
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      in >> j;
      const auto& data = j.at("data");
      const auto rows = static_cast<Eigen::Index>(data.size());
      if (rows == 0) throw ValidationError("read_density_file: empty data");
      const auto cols = static_cast<Eigen::Index>(data.at(0).size());
      out.value.resize(rows, cols);
      for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = data.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != cols) {
          throw ValidationError("read_density_file: ragged data at row " + std::to_string(i));
        }
        for (Eigen::Index k = 0; k < cols; ++k) {
          out.value(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
        }
      }
      if (j.contains("n")) out.n = j.at("n").get<Eigen::Index>();
      if (j.contains("m")) out.m = j.at("m").get<Eigen::Index>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("read_density_file: " + path.string() + ": " + e.what());
    }
  } else {
    out.value = read_matrix_csv(in);
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << contents;
}

}  // namespace qcflow::io
