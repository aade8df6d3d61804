#include "ccd/qp.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace ccd;

namespace {

QuadraticProgram make(Mat H, Vec g, Mat A, Vec b) { return {std::move(H), std::move(g), std::move(A), std::move(b)}; }

}  // namespace

TEST(Qp, SingleActiveConstraint) {
  // min z^2  s.t. z >= 1
  const QpSolution s = solve_qp(make(Mat::Constant(1, 1, 2.0), Vec::Zero(1),
                                     Mat::Constant(1, 1, -1.0), Vec::Constant(1, -1.0)));
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.z(0), 1.0, 1e-12);
  EXPECT_NEAR(s.objective, 1.0, 1e-12);
}

TEST(Qp, SymmetricPair) {
  Mat A(1, 2);
  A << -1, -1;
  const QpSolution s =
      solve_qp(make(2.0 * Mat::Identity(2, 2), Vec::Zero(2), A, Vec::Constant(1, -2.0)));
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.z(0), 1.0, 1e-12);
  EXPECT_NEAR(s.z(1), 1.0, 1e-12);
}

TEST(Qp, EmptySetIsInfeasible) {
  Mat A(2, 1);
  A << 1, -1;
  const QpSolution s =
      solve_qp(make(Mat::Constant(1, 1, 2.0), Vec::Zero(1), A, Eigen::Vector2d(0, -1)));
  EXPECT_EQ(s.status, QpStatus::Infeasible);
}

TEST(Phase1, EmptyConstraintList) {
  const Phase1Result r = phase1_feasibility(Mat::Zero(0, 2), Vec::Zero(0));
  EXPECT_TRUE(r.feasible);
  EXPECT_EQ(r.max_slack, 0.0);
}

TEST(Phase1, Interval) {
  Mat A(2, 1);
  A << 1, -1;
  EXPECT_TRUE(phase1_feasibility(A, Eigen::Vector2d(1, 0)).feasible);
}

TEST(Phase1, MinimaxMidpoint) {
  Mat A(2, 1);
  A << 1, -1;
  const Phase1Result r = phase1_feasibility(A, Eigen::Vector2d(0, -1));
  EXPECT_FALSE(r.feasible);
  EXPECT_NEAR(r.max_slack, 0.5, 1e-9);
  EXPECT_NEAR(r.z(0), 0.5, 1e-9);
}

namespace {

QuadraticProgram random_feasible_qp(std::mt19937_64& rng) {
  const int n = 2 + static_cast<int>(rng() % 19);
  const int m = 1 + static_cast<int>(rng() % 60);
  const Mat L = oracle::random_matrix(rng, n, n);
  QuadraticProgram qp;
  qp.H = L * L.transpose() + 0.5 * Mat::Identity(n, n);
  qp.g = oracle::random_matrix(rng, n, 1, 3.0);
  qp.A_in = oracle::random_matrix(rng, m, n);
  const Vec z0 = oracle::random_matrix(rng, n, 1);
  qp.b_in = qp.A_in * z0 + Vec::NullaryExpr(m, [&] { return oracle::uniform(rng, 0.0, 1.0); });
  return qp;
}

}  // namespace

TEST(Qp, AgreesWithDualProjectedGradient) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 50; ++t) {
    const QuadraticProgram qp = random_feasible_qp(rng);
    const QpSolution s = solve_qp(qp);
    ASSERT_TRUE(s.optimal()) << "instance " << t;
    const double dual = oracle::dual_projected_gradient(qp, 200000);
    EXPECT_NEAR(s.objective, dual, 1e-5) << "instance " << t;
  }
}

TEST(Qp, KktConditions) {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 50; ++t) {
    const QuadraticProgram qp = random_feasible_qp(rng);
    const QpSolution s = solve_qp(qp);
    ASSERT_TRUE(s.optimal());
    const Vec stat = qp.H * s.z + qp.g + qp.A_in.transpose() * s.lambda;
    EXPECT_LE(stat.cwiseAbs().maxCoeff(), 1e-5);
    EXPECT_GE(s.lambda.minCoeff(), 0.0);
    const Vec slack = qp.b_in - qp.A_in * s.z;
    EXPECT_GE(slack.minCoeff(), -1e-6);
    EXPECT_LE(s.lambda.cwiseProduct(slack).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(Qp, Deterministic) {
  std::mt19937_64 rng(23);
  const QuadraticProgram qp = random_feasible_qp(rng);
  const QpSolution a = solve_qp(qp);
  const QpSolution b = solve_qp(qp);
  EXPECT_EQ(a.z, b.z);
  EXPECT_EQ(a.objective, b.objective);
}
