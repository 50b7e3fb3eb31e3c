#include "ttcert/linalg.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ttcert;

namespace {

Matrix random_spd_band(Index n, Index bw, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix a = Matrix::Zero(Eigen::Index(n), Eigen::Index(n));
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < std::min(n, i + bw + 1); ++j) {
      const double v = u(gen);
      a(Eigen::Index(i), Eigen::Index(j)) = v;
      a(Eigen::Index(j), Eigen::Index(i)) = v;
    }
  a.diagonal().array() += double(2 * bw + 2);
  return a;
}

}  // namespace

TEST(Linalg, BandedCholeskyMatchesDense) {
  const Index n = 40, bw = 5;
  const Matrix a = random_spd_band(n, bw, 1);
  BandedCholesky chol(n, bw);
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < std::min(n, j + bw + 1); ++i) chol.add(i, j, a(Eigen::Index(i), Eigen::Index(j)));
  ASSERT_TRUE(chol.factor());
  Vector b = Vector::LinSpaced(Eigen::Index(n), -1.0, 2.0);
  Vector x = b;
  chol.solve(x.data());
  EXPECT_LT((a * x - b).norm(), 1e-12 * b.norm());
}

TEST(Linalg, BandedCholeskyRejectsIndefinite) {
  BandedCholesky chol(3, 1);
  chol.add(0, 0, 1.0);
  chol.add(1, 0, 2.0);
  chol.add(1, 1, 1.0);
  chol.add(2, 2, 1.0);
  EXPECT_FALSE(chol.factor());
}

TEST(Linalg, GmresSolvesNonsymmetricSystem) {
  const Eigen::Index n = 60;
  Matrix a = Matrix::Identity(n, n) * 4.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    a(i, i + 1) = -1.0;
    a(i + 1, i) = -2.0;
  }
  const Vector b = Vector::Ones(n);
  Vector x = Vector::Zero(n);
  const auto op = [&](const double* in, double* out) {
    Eigen::Map<Vector>(out, n) = a * Eigen::Map<const Vector>(in, n);
  };
  const auto jacobi = [&](double* v) {
    for (Eigen::Index i = 0; i < n; ++i) v[i] /= a(i, i);
  };
  const KrylovResult r = gmres(op, jacobi, b, x, 10, 500, 1e-12);
  EXPECT_TRUE(r.converged);
  EXPECT_LT((a * x - b).norm(), 1e-11 * b.norm());
}

TEST(Linalg, GmresZeroRhsGivesZero) {
  Vector x = Vector::Ones(5);
  const auto op = [](const double* in, double* out) { std::copy(in, in + 5, out); };
  const auto id = [](double*) {};
  const KrylovResult r = gmres(op, id, Vector::Zero(5), x, 5, 10, 1e-10);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(x.norm(), 0.0);
}

TEST(Linalg, PcgSolvesSpdSystem) {
  const Index n = 50;
  const Matrix a = random_spd_band(n, 3, 2);
  const Vector b = Vector::LinSpaced(Eigen::Index(n), 1.0, 3.0);
  Vector x = Vector::Zero(Eigen::Index(n));
  const auto op = [&](const double* in, double* out) {
    Eigen::Map<Vector>(out, Eigen::Index(n)) = a * Eigen::Map<const Vector>(in, Eigen::Index(n));
  };
  const KrylovResult r = pcg(op, [](double*) {}, b, x, 500, 1e-12);
  EXPECT_TRUE(r.converged);
  EXPECT_LT((a * x - b).norm(), 1e-11 * b.norm());
}

TEST(Linalg, MaxvolFindsDominantRows) {
  Matrix a = Matrix::Random(30, 4) * 0.1;
  a.row(7) << 5, 0, 0, 0;
  a.row(13) << 0, 5, 0, 0;
  a.row(21) << 0, 0, 5, 0;
  a.row(2) << 0, 0, 0, 5;
  std::vector<Index> rows = maxvol(a);
  std::sort(rows.begin(), rows.end());
  EXPECT_EQ(rows, (std::vector<Index>{2, 7, 13, 21}));
}

TEST(Linalg, MaxvolBoundsCoefficients) {
  const Matrix a = Matrix::Random(100, 6);
  const std::vector<Index> rows = maxvol(a);
  Matrix sub(6, 6);
  for (Index k = 0; k < 6; ++k) sub.row(Eigen::Index(k)) = a.row(Eigen::Index(rows[k]));
  const Matrix c = a * sub.inverse();
  EXPECT_LE(c.cwiseAbs().maxCoeff(), 1.05 + 1e-10);
}
