#include "ccd/plant.hpp"
#include "ccd/profile.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ccd;

TEST(Mix, EqualFlowsAverage) {
  const MixResult r = mix({1.0, 1.0}, 30.0, 20.0);
  EXPECT_DOUBLE_EQ(r.mdot_m, 2.0);
  EXPECT_DOUBLE_EQ(r.T_m, 25.0);
}

TEST(Mix, SingleStreamPassesThrough) {
  const MixResult r = mix({1.0, 0.0}, 99.0, 20.0);
  EXPECT_DOUBLE_EQ(r.mdot_m, 1.0);
  EXPECT_DOUBLE_EQ(r.T_m, 20.0);
}

TEST(Mix, ConvexCombination) {
  const MixResult r = mix({0.3, 0.7}, 40.0, 20.0);
  EXPECT_NEAR(r.mdot_m, 1.0, 1e-15);
  EXPECT_NEAR(r.T_m, 34.0, 1e-12);
}

TEST(Mix, ZeroFlowRaises) { EXPECT_THROW(mix({0.0, 0.0}, 20.0, 20.0), DegenerateFlow); }

TEST(Derivative, RecirculationTemperatureRate) {
  PlantParams p;
  SimState x{1.0, 2.0, 30.0, 10.0, 20.0};
  // mdot_m = 1 with mdot_e = 0.5
  const StateVec dx = state_derivative(x, {0.4, 0.6}, {0.0, 10.0, 0.5}, p);
  EXPECT_NEAR(dx(4), -2.5, 1e-12);
}

TEST(Derivative, ThermalEquilibriumIsStationary) {
  PlantParams p;
  p.T_f = 25.0;
  SimState x{1.0, 1.0, 25.0, 25.0, 25.0};
  const StateVec dx = state_derivative(x, {0.02, 0.05}, {0.0, 25.0, 0.01}, p);
  EXPECT_NEAR(dx(2), 0.0, 1e-14);
  EXPECT_NEAR(dx(3), 0.0, 1e-14);
  EXPECT_NEAR(dx(4), 0.0, 1e-14);
}

TEST(Derivative, TotalFluidMassDrainsAtExitFlow) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    SimState x{oracle::uniform(rng, 0.1, 2), oracle::uniform(rng, 0.1, 2), 40, 30, 25};
    const ControlInput u{oracle::uniform(rng, 0, 0.05), oracle::uniform(rng, 0.01, 0.1)};
    const Disturbance d{2.0, 10.0, oracle::uniform(rng, 0, 0.01)};
    const StateVec dx = state_derivative(x, u, d, PlantParams{});
    EXPECT_NEAR(dx(0) + dx(1), -d.mdot_e, 1e-15);
  }
}

TEST(Derivative, LowMassRaises) {
  SimState x{1.0, 1e-4, 30, 30, 30};
  EXPECT_THROW(state_derivative(x, {0.01, 0.01}, {}, PlantParams{}), SingularMass);
}

TEST(Derivative, HeatCapacityRatioCancelsFlowScaling) {
  // Scaling c_p and both capacities together leaves temperature rates unchanged
  // when the sink coupling scales the same way.
  PlantParams p;
  SimState x{1.0, 1.0, 48.0, 30.0, 25.0};
  const ControlInput u{0.01, 0.05};
  const Disturbance d{3.0, 5.0, 0.002};
  PlantParams q = p;
  q.c_p *= 2;
  q.C_h *= 2;
  q.C_c *= 2;
  q.R_s /= 2;
  const Disturbance d2{6.0, 5.0, 0.002};
  const StateVec a = state_derivative(x, u, d, p);
  const StateVec b = state_derivative(x, u, d2, q);
  EXPECT_NEAR((a - b).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Rk4, MatchesExponentialDecay) {
  // T_r relaxes toward T_c at rate through/M_r = 1 when nothing else moves it.
  PlantParams p;
  p.C_c = 1e12;  // freeze T_c
  SimState x{1.0, 1.0, 0.0, 0.0, 1.0};
  const SimState y = rk4_step(x, {0.0, 1.0}, {0.0, 0.0, 0.0}, p, 0.1);
  EXPECT_NEAR(y.T_r, std::exp(-0.1), 1e-6);
}

TEST(Rk4, ConstantRateMassIsExact) {
  SimState x{1.0, 1.0, 30, 30, 30};
  const SimState y = rk4_step(x, {0.1, 0.1}, {0.0, 30.0, 0.0}, PlantParams{}, 1.0);
  EXPECT_DOUBLE_EQ(y.M_f, 0.9);
}

TEST(Rk4, FourthOrderConvergence) {
  PlantParams p;
  SimState x{1.0, 0.3, 47.0, 20.0, 22.0};
  const ControlInput u{0.01, 0.03};
  const Disturbance d{6.0, 5.0, 0.002};
  const StateVec ref = simulate_interval(x, u, d, p, 1.0, 2000).vec();
  const double e1 = (simulate_interval(x, u, d, p, 1.0, 4).vec() - ref).norm();
  const double e2 = (simulate_interval(x, u, d, p, 1.0, 8).vec() - ref).norm();
  EXPECT_GT(e1 / e2, 12.0);  // 16 in the limit
}

TEST(Simulate, DefaultSubstepsAreConverged) {
  PlantParams p;
  SimState x{0.5, 0.1, 47.0, 20.0, 20.0};
  const ControlInput u{0.003, 0.02};
  const Disturbance d{6.0, 5.0, 0.004};
  const StateVec a = simulate_interval(x, u, d, p, 1.0, 10).vec();
  const StateVec b = simulate_interval(x, u, d, p, 1.0, 100).vec();
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Simulate, ZeroFlowsRaise) {
  EXPECT_THROW(simulate_interval({1, 1, 30, 30, 30}, {0, 0}, {}, PlantParams{}, 1.0, 10),
               DegenerateFlow);
}

TEST(Jacobians, MatchCentralDifferences) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 100; ++t) {
    const SimState x{oracle::uniform(rng, 0.05, 2), oracle::uniform(rng, 0.05, 2),
                     oracle::uniform(rng, 0, 60), oracle::uniform(rng, 0, 60),
                     oracle::uniform(rng, 0, 60)};
    const ControlInput u{oracle::uniform(rng, 0.001, 0.1), oracle::uniform(rng, 0.001, 0.1)};
    const Disturbance d{oracle::uniform(rng, 0, 10), oracle::uniform(rng, 0, 30),
                        oracle::uniform(rng, 0, 0.01)};
    const PlantParams p{oracle::uniform(rng, 5, 20), oracle::uniform(rng, 5, 20),
                        oracle::uniform(rng, 5, 30), oracle::uniform(rng, 3, 6), kWaterCp};
    const Linearization an = jacobians(x, u, d, p);
    const Linearization fd = oracle::fd_jacobians(x, u, d, p);
    EXPECT_LT(oracle::scaled_error(an.A, fd.A), 1e-6);
    EXPECT_LT(oracle::scaled_error(an.Bu, fd.Bu), 1e-6);
    EXPECT_LT(oracle::scaled_error(an.Bd, fd.Bd), 1e-6);
  }
}

TEST(Jacobians, ReservoirMassDoesNotFeedBack) {
  const Linearization lin =
      jacobians({1.0, 0.5, 47, 20, 22}, {0.01, 0.03}, {3, 5, 0.002}, PlantParams{});
  EXPECT_EQ(lin.A.col(0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Perturb, ZeroBoxIsIdentity) {
  const auto prof = make_pulsed_profile({3.0, {{2, 5, 6}}, 5.0, 0.002, {}}, 10.0, 1.0);
  const BoxSet zero = BoxSet::point(Vec::Zero(3));
  EXPECT_EQ(perturb_profile(prof, zero, Perturbation::random(4)), prof);
  EXPECT_EQ(perturb_profile(prof, zero, Perturbation::vertex_hi()), prof);
}

TEST(Perturb, VertexHiShiftsLoadByUpperBound) {
  const auto prof = make_pulsed_profile({3.0, {{2, 5, 6}}, 5.0, 0.002, {}}, 10.0, 1.0);
  const BoxSet w(Vec::Constant(3, -1.0).cwiseProduct(Eigen::Vector3d(1, 0.5, 0)),
                 Eigen::Vector3d(1, 0.5, 0));
  const auto hi = perturb_profile(prof, w, Perturbation::vertex_hi());
  for (int k = 1; k <= prof.size(); ++k) {
    EXPECT_DOUBLE_EQ(hi.at(k).Qdot_h, prof.at(k).Qdot_h + 1.0);
  }
}

TEST(Perturb, RandomStaysInsideBox) {
  const auto prof = make_pulsed_profile({3.0, {{2, 5, 6}}, 5.0, 0.002, {}}, 50.0, 1.0);
  const BoxSet w(Eigen::Vector3d(-0.3, -0.5, -0.001), Eigen::Vector3d(0.3, 0.5, 0.001));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = perturb_profile(prof, w, Perturbation::random(seed));
    for (int k = 1; k <= prof.size(); ++k) {
      const Vec dw = r.at(k).vec() - prof.at(k).vec();
      EXPECT_TRUE(w.contains(dw, 1e-15));
    }
    EXPECT_EQ(r, perturb_profile(prof, w, Perturbation::random(seed)));
  }
}
