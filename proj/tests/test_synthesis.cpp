#include "ccd/synthesis.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ccd;

namespace {

// Truncated Taylor series, fine for ||M|| <= 1.
Mat series_exp(const Mat& M) {
  Mat term = Mat::Identity(M.rows(), M.cols());
  Mat sum = term;
  for (int k = 1; k < 40; ++k) {
    term = term * M / k;
    sum += term;
  }
  return sum;
}

}  // namespace

TEST(MatrixExponential, Zero) {
  EXPECT_TRUE(matrix_exponential(Mat::Zero(3, 3)).isApprox(Mat::Identity(3, 3)));
}

TEST(MatrixExponential, Diagonal) {
  const Mat E = matrix_exponential(Eigen::Vector2d(1, 2).asDiagonal().toDenseMatrix());
  EXPECT_NEAR(E(0, 0), std::exp(1.0), 1e-13);
  EXPECT_NEAR(E(1, 1), std::exp(2.0), 1e-12);
  EXPECT_NEAR(std::abs(E(0, 1)) + std::abs(E(1, 0)), 0.0, 1e-15);
}

TEST(MatrixExponential, Nilpotent) {
  Mat N(2, 2);
  N << 0, 1, 0, 0;
  Mat want(2, 2);
  want << 1, 1, 0, 1;
  EXPECT_LT((matrix_exponential(N) - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MatrixExponential, AgreesWithSeriesOnUnitBall) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 30; ++t) {
    Mat M = oracle::random_matrix(rng, 5, 5);
    M /= M.norm();
    EXPECT_LT((matrix_exponential(M) - series_exp(M)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Zoh, PureIntegrator) {
  const DiscreteMatrices d = discretize_zoh(Mat::Zero(2, 2), Mat::Identity(2, 2), 1.0);
  EXPECT_TRUE(d.A.isApprox(Mat::Identity(2, 2)));
  EXPECT_TRUE(d.B.isApprox(Mat::Identity(2, 2)));
}

TEST(Zoh, ScalarClosedForm) {
  const DiscreteMatrices d =
      discretize_zoh(Mat::Constant(1, 1, -1.0), Mat::Constant(1, 1, 1.0), 1.0);
  EXPECT_NEAR(d.A(0, 0), std::exp(-1.0), 1e-14);
  EXPECT_NEAR(d.B(0, 0), 1.0 - std::exp(-1.0), 1e-14);
}

TEST(Zoh, MatchesFineRk4OnStableSystems) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const Mat Ac = oracle::random_stable(rng, 4);
    const Mat Bc = oracle::random_matrix(rng, 4, 3);
    const Vec x0 = oracle::random_matrix(rng, 4, 1);
    const Vec u = oracle::random_matrix(rng, 3, 1);
    const DiscreteMatrices d = discretize_zoh(Ac, Bc, 1.0);
    const Vec want = oracle::rk4_linear(Ac, Bc, x0, u, 1.0, 1000);
    EXPECT_LT((d.A * x0 + d.B * u - want).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Linearize, AffineModelReproducesDriftAtOperatingPoint) {
  const SimState x{0.5, 0.2, 47.0, 21.0, 22.0};
  const ControlInput u{0.01, 0.03};
  const Disturbance d{4.0, 5.0, 0.002};
  const PlantParams p;
  const AffineModel m = linearize_discrete(x, u, d, p, 1.0);
  const Vec next = m.predict(m.x_e, m.u_e, m.d_e);
  EXPECT_LT((next - (m.x_e + m.e_aff)).cwiseAbs().maxCoeff(), 1e-14);
  // one-step prediction tracks the nonlinear plant at the linearization point
  const StateVec sim = simulate_interval(x, u, d, p, 1.0, 100).vec();
  EXPECT_LT((next - sim).cwiseAbs().maxCoeff(), 5e-3);
}

TEST(Controllable, ReducedOrderingAndRank) {
  const AffineModel full =
      linearize_discrete({0.5, 0.2, 47.0, 21.0, 22.0}, {0.01, 0.03}, {4.0, 5.0, 0.002},
                         PlantParams{}, 1.0);
  EXPECT_LT(controllability_rank(full.A, full.Bu), 5);
  const AffineModel red = extract_controllable(full, kReservoirMassIndex);
  ASSERT_EQ(red.states(), 4);
  EXPECT_EQ(controllability_rank(red.A, red.Bu), 4);
  // retained block is the full model with row/column 0 deleted
  EXPECT_EQ(red.A, full.A.bottomRightCorner(4, 4));
  EXPECT_EQ(red.Bu, full.Bu.bottomRows(4));
  EXPECT_EQ(red.x_e, full.x_e.tail(4));
  // reinserting a zero row and column recovers the full dimensions
  Mat back = Mat::Zero(5, 5);
  back.bottomRightCorner(4, 4) = red.A;
  EXPECT_EQ(back.rows(), full.A.rows());
}

TEST(Controllable, UncontrollableRaises) {
  AffineModel m;
  m.A = Mat::Identity(3, 3);
  m.Bu = Mat::Zero(3, 1);
  m.Bu(1, 0) = 1.0;
  m.Bd = Mat::Zero(3, 1);
  m.e_aff = m.x_e = Vec::Zero(3);
  m.u_e = Vec::Zero(1);
  m.d_e = Vec::Zero(1);
  EXPECT_THROW(extract_controllable(m, 0), NotControllable);
}

TEST(Dlqr, ScalarClosedForm) {
  const LqrResult r = dlqr(Mat::Constant(1, 1, 0.5), Mat::Constant(1, 1, 1.0),
                           Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, 1.0));
  const oracle::ScalarDare want = oracle::scalar_dare(0.5, 1.0, 1.0, 1.0);
  EXPECT_NEAR(r.P(0, 0), want.P, 1e-10);
  EXPECT_NEAR(r.P(0, 0), 1.13278, 1e-5);
  EXPECT_NEAR(std::abs(r.K(0, 0)), 0.26556, 1e-5);
  EXPECT_NEAR(r.K(0, 0), want.K, 1e-10);
}

TEST(Dlqr, DeadbeatPlant) {
  const LqrResult r = dlqr(Mat::Zero(1, 1), Mat::Constant(1, 1, 1.0),
                           Mat::Constant(1, 1, 2.0), Mat::Constant(1, 1, 1.0));
  EXPECT_NEAR(r.P(0, 0), 2.0, 1e-14);
  EXPECT_NEAR(r.K(0, 0), 0.0, 1e-14);
}

TEST(Dlqr, RandomPairsSolveTheRiccatiEquation) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 50; ++t) {
    const int n = 4, m = 2;
    const Mat A = oracle::random_matrix(rng, n, n, 0.8);
    const Mat B = oracle::random_matrix(rng, n, m);
    const Mat L = oracle::random_matrix(rng, n, n);
    const Mat Q = L * L.transpose() + 0.1 * Mat::Identity(n, n);
    const Mat R = Mat::Identity(m, m) * oracle::uniform(rng, 0.5, 2.0);
    const LqrResult r = dlqr(A, B, Q, R);
    // residual computed here, independently of dare_residual
    const Mat BtPA = B.transpose() * r.P * A;
    const Mat res = A.transpose() * r.P * A -
                    BtPA.transpose() * (R + B.transpose() * r.P * B).inverse() * BtPA + Q - r.P;
    EXPECT_LE(res.cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT(spectral_radius(A + B * r.K), 1.0);
  }
}
