#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "qcflow/errors.hpp"
#include "qcflow/io.hpp"

using namespace qcflow;

TEST_CASE("matrix CSV round trip is exact") {
  std::mt19937_64 gen(101);
  const Matrix A = oracle::random_matrix(5, 4, gen, -1e3, 1e3);
  std::stringstream ss;
  io::write_matrix_csv(ss, A);
  CHECK(io::read_matrix_csv(ss) == A);
}

TEST_CASE("matrix CSV errors") {
  std::istringstream ragged("1,2\n3\n");
  CHECK_THROWS_AS(io::read_matrix_csv(ragged), ValidationError);
  std::istringstream junk("1,x\n");
  CHECK_THROWS_AS(io::read_matrix_csv(junk), ValidationError);
  std::istringstream empty("\n\n");
  CHECK_THROWS_AS(io::read_matrix_csv(empty), ValidationError);
  std::istringstream spaced(" 1, 2 \r\n\n3,4\n");
  CHECK(io::read_matrix_csv(spaced) == (Matrix(2, 2) << 1, 2, 3, 4).finished());
}

TEST_CASE("trajectory CSV golden output") {
  Trajectory t;
  t.initial_rank = 3;
  t.samples.push_back({0.0, 0.5, 1.0, {0.25, 0.5, 0.25}, 1e-16, 2e-16, 0.125});
  t.samples.push_back({1.5, 0.25, 1.0, {0.5, std::nullopt, 0.5}, 0.0, 0.0, 0.0625});
  t.events.push_back({1.5, EventKind::Discard, "theta_2 value=1e-10"});
  t.events.push_back({2.0, EventKind::Terminate, "stationarity"});
  std::ostringstream traj, events;
  io::write_trajectory_csv(traj, t);
  io::write_events_csv(events, t);
  CHECK(traj.str() ==
        "t,objective,theta_sum,grad_norm,ortho_u,ortho_v,theta_1,theta_2,theta_3\n"
        "0,0.5,1,0.125,9.9999999999999998e-17,2e-16,0.25,0.5,0.25\n"
        "1.5,0.25,1,0.0625,0,0,0.5,,0.5\n");
  CHECK(events.str() ==
        "t,kind,detail\n"
        "1.5,discard,theta_2 value=1e-10\n"
        "2,terminate,stationarity\n");
}

TEST_CASE("sweep CSV golden output") {
  std::ostringstream os;
  io::write_sweep_csv(os, {{15, 4, 4, 0.125, 0.25, 5}});
  CHECK(os.str() == "n,m,r,best_objective,mean_objective,restarts\n15,4,4,0.125,0.25,5\n");
}

TEST_CASE("format_number round trips") {
  std::mt19937_64 gen(103);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double v = u(gen) * std::pow(10.0, static_cast<int>(gen() % 40) - 20);
    CHECK(std::stod(io::format_number(v)) == v);
  }
  CHECK(io::format_number(std::nan("")).empty());
}
