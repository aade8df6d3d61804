#pragma once

#include "ccd/types.hpp"

namespace ccd {

inline constexpr double kWaterCp = 4.186;     // kJ/(kg K)
inline constexpr double kMinFlow = 1e-6;      // kg/s
inline constexpr double kMinMass = 1e-3;      // kg

/// Co-designed plant parameters plus the fluid constant.
struct PlantParams {
  double C_c = 5.0;   // kJ/K
  double C_h = 5.0;   // kJ/K
  double T_f = 20.0;  // degC
  double R_s = 4.5;   // K/kW
  double c_p = kWaterCp;
};

struct SimState {
  double M_f = 0.0;  // kg
  double M_r = 0.0;  // kg
  double T_h = 0.0;  // degC
  double T_c = 0.0;  // degC
  double T_r = 0.0;  // degC

  StateVec vec() const;
  static SimState from(const StateVec& v);
  /// [M_r, T_h, T_c, T_r]
  Eigen::Vector4d reduced() const { return {M_r, T_h, T_c, T_r}; }
};

struct ControlInput {
  double mdot_f = 0.0;  // kg/s
  double mdot_r = 0.0;  // kg/s

  InputVec vec() const { return {mdot_f, mdot_r}; }
  static ControlInput from(const InputVec& v) { return {v(0), v(1)}; }
};

struct Disturbance {
  double Qdot_h = 0.0;  // kW
  double T_s = 0.0;     // degC
  double mdot_e = 0.0;  // kg/s

  DistVec vec() const { return {Qdot_h, T_s, mdot_e}; }
  static Disturbance from(const DistVec& v) { return {v(0), v(1), v(2)}; }
};

struct MixResult {
  double mdot_m;
  double T_m;
};

MixResult mix(const ControlInput& u, double T_r, double T_f);

StateVec state_derivative(const SimState& x, const ControlInput& u,
                          const Disturbance& d, const PlantParams& p);

SimState rk4_step(const SimState& x, const ControlInput& u,
                  const Disturbance& d, const PlantParams& p, double h);

/// Integrates one control sample with `n_sub` RK4 substeps under zero-order
/// hold on u and d.
SimState simulate_interval(const SimState& x, const ControlInput& u,
                           const Disturbance& d, const PlantParams& p,
                           double tau_s, int n_sub);

/// Continuous-time linearization of the plant at one operating point.
struct Linearization {
  Eigen::Matrix<double, kStates, kStates> A;
  Eigen::Matrix<double, kStates, kInputs> Bu;
  Eigen::Matrix<double, kStates, kDisturbances> Bd;
  StateVec f0;
};

Linearization jacobians(const SimState& x, const ControlInput& u,
                        const Disturbance& d, const PlantParams& p);

}  // namespace ccd
