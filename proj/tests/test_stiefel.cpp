#include <doctest.h>

#include <cstring>

#include "oracles.hpp"
#include "qcflow/errors.hpp"
#include "qcflow/stiefel.hpp"

using namespace qcflow;

TEST_CASE("StiefelPoint rejects non-orthonormal input") {
  CHECK_THROWS_AS(StiefelPoint(Matrix::Identity(3, 3) * 1.001), ValidationError);
  CHECK_THROWS_AS(StiefelPoint(Matrix::Identity(2, 3)), SizeError);
  CHECK_NOTHROW(StiefelPoint(Matrix::Identity(4, 2)));
  CHECK_NOTHROW(StiefelPoint(Matrix::Identity(3, 3) * (1 + 1e-10), 1e-8));
}

TEST_CASE("random_stiefel") {
  Rng rng = substream(42, "test");
  SUBCASE("square") {
    const StiefelPoint R = stiefel::random_stiefel(3, 3, rng);
    CHECK((R.value().transpose() * R.value() - Matrix::Identity(3, 3)).norm() <= 1e-12);
  }
  SUBCASE("one dimensional") {
    const StiefelPoint R = stiefel::random_stiefel(1, 1, rng);
    CHECK(std::abs(R.value()(0, 0)) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("deterministic under a fixed seed") {
    Rng a = substream(7, "stiefel");
    Rng b = substream(7, "stiefel");
    const Matrix A = stiefel::random_stiefel(16, 3, a).value();
    const Matrix B = stiefel::random_stiefel(16, 3, b).value();
    CHECK(std::memcmp(A.data(), B.data(), sizeof(double) * A.size()) == 0);
    Rng c = substream(8, "stiefel");
    CHECK(stiefel::random_stiefel(16, 3, c).value() != A);
  }
  SUBCASE("too many columns") {
    CHECK_THROWS_AS(stiefel::random_stiefel(2, 3, rng), SizeError);
  }
  SUBCASE("mean of the first entry vanishes") {
    // Orthogonal invariance: the sign of any entry is symmetric.
    double sum = 0.0;
    for (int k = 0; k < 2000; ++k) sum += stiefel::random_stiefel(4, 2, rng).value()(0, 1);
    CHECK(std::abs(sum / 2000.0) < 0.05);
  }
}

TEST_CASE("riemannian_gradient") {
  std::mt19937_64 gen(31);
  const StiefelPoint Y(oracle::random_orthonormal(8, 3, gen));

  SUBCASE("normal-space directions are annihilated") {
    Matrix S = oracle::random_matrix(3, 3, gen);
    S = (S + S.transpose()).eval();
    CHECK(stiefel::riemannian_gradient(Y.value() * S, Y).norm() <= 1e-12);
  }
  SUBCASE("zero") {
    CHECK(stiefel::riemannian_gradient(Matrix::Zero(8, 3), Y).isZero(0.0));
  }
  SUBCASE("matches 2 skew(G Y^T) Y and is tangent") {
    for (int k = 0; k < 20; ++k) {
      const Matrix G = oracle::random_matrix(8, 3, gen);
      const Matrix A = G * Y.value().transpose();
      const Matrix want = (A - A.transpose()) * Y.value();
      const Matrix got = stiefel::riemannian_gradient(G, Y);
      CHECK((got - want).norm() <= 1e-12 * std::max(1.0, want.norm()));
      CHECK(stiefel::tangency_residual(got, Y) <= 1e-12);
    }
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(stiefel::riemannian_gradient(Matrix::Zero(8, 2), Y), SizeError);
  }
}

TEST_CASE("tangency_residual") {
  std::mt19937_64 gen(37);
  const StiefelPoint Y(oracle::random_orthonormal(6, 3, gen));
  Matrix K = oracle::random_matrix(3, 3, gen);
  K = (K - K.transpose()).eval();
  CHECK(stiefel::tangency_residual(Y.value() * K, Y) <= 1e-12);
  CHECK(stiefel::tangency_residual(Y.value(), Y) == doctest::Approx(2.0 * std::sqrt(3.0)));

  const Matrix X = oracle::random_matrix(6, 3, gen);
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double e = 0.0;
      for (int p = 0; p < 6; ++p) e += X(p, i) * Y.value()(p, j) + Y.value()(p, i) * X(p, j);
      s += e * e;
    }
  }
  CHECK(stiefel::tangency_residual(X, Y) == doctest::Approx(std::sqrt(s)).epsilon(1e-13));
  CHECK_THROWS_AS(stiefel::tangency_residual(Matrix::Zero(5, 3), Y), SizeError);
}

TEST_CASE("reorthonormalize") {
  std::mt19937_64 gen(41);
  const Matrix Q = oracle::random_orthonormal(7, 3, gen);

  CHECK((stiefel::reorthonormalize(Q).value() - Q).norm() <= 1e-12);
  CHECK((stiefel::reorthonormalize(2.0 * Q).value() - Q).norm() <= 1e-12);

  SUBCASE("nearest orthonormal matrix among samples") {
    for (int trial = 0; trial < 5; ++trial) {
      const Matrix Y = oracle::random_matrix(7, 3, gen);
      const Matrix W = stiefel::reorthonormalize(Y).value();
      CHECK((W.transpose() * W - Matrix::Identity(3, 3)).norm() <= 1e-12);
      const double best = (Y - W).norm();
      for (int k = 0; k < 500; ++k) {
        const Matrix Z = oracle::random_orthonormal(7, 3, gen);
        CHECK(best <= (Y - Z).norm() + 1e-12);
      }
      // Small perturbations of W along the manifold do not get closer either.
      for (int k = 0; k < 50; ++k) {
        const Matrix Z = oracle::gram_schmidt(W + 1e-3 * oracle::random_matrix(7, 3, gen));
        CHECK(best <= (Y - Z).norm() + 1e-12);
      }
      // Idempotent.
      CHECK((stiefel::reorthonormalize(W).value() - W).norm() <= 1e-12);
    }
  }
  SUBCASE("rank deficient") {
    Matrix Y = oracle::random_matrix(5, 3, gen);
    Y.col(2) = Y.col(0);
    CHECK_THROWS_AS(stiefel::reorthonormalize(Y), DegeneracyError);
  }
}
