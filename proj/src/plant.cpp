#include "ccd/plant.hpp"

#include <algorithm>
#include <string>

namespace ccd {

StateVec SimState::vec() const {
  StateVec v;
  v << M_f, M_r, T_h, T_c, T_r;
  return v;
}

SimState SimState::from(const StateVec& v) { return {v(0), v(1), v(2), v(3), v(4)}; }

MixResult mix(const ControlInput& u, double T_r, double T_f) {
  const double mdot_m = u.mdot_f + u.mdot_r;
  if (!(mdot_m >= kMinFlow)) {
    throw DegenerateFlow("mixed flow " + std::to_string(mdot_m) +
                         " kg/s is below the admissible minimum");
  }
  return {mdot_m, (u.mdot_f * T_f + u.mdot_r * T_r) / mdot_m};
}

namespace {

void check_mass(double M_r) {
  if (!(M_r >= kMinMass)) {
    throw SingularMass("recirculation tank mass " + std::to_string(M_r) +
                       " kg is below the admissible minimum");
  }
}

}  // namespace

StateVec state_derivative(const SimState& x, const ControlInput& u,
                          const Disturbance& d, const PlantParams& p) {
  check_mass(x.M_r);
  const auto [mdot_m, T_m] = mix(u, x.T_r, p.T_f);
  const double through = mdot_m - d.mdot_e;  // flow past the exit tap

  StateVec dx;
  dx(0) = -u.mdot_f;
  dx(1) = u.mdot_f - d.mdot_e;
  dx(2) = (mdot_m * p.c_p * (T_m - x.T_h) + d.Qdot_h) / p.C_h;
  dx(3) = (through * p.c_p * (x.T_h - x.T_c) + (d.T_s - x.T_c) / p.R_s) / p.C_c;
  dx(4) = through * (x.T_c - x.T_r) / x.M_r;
  return dx;
}

SimState rk4_step(const SimState& x, const ControlInput& u,
                  const Disturbance& d, const PlantParams& p, double h) {
  if (!(h > 0.0)) throw CcdError("rk4_step: step must be positive");
  const StateVec x0 = x.vec();
  const StateVec k1 = state_derivative(x, u, d, p);
  const StateVec k2 = state_derivative(SimState::from(x0 + 0.5 * h * k1), u, d, p);
  const StateVec k3 = state_derivative(SimState::from(x0 + 0.5 * h * k2), u, d, p);
  const StateVec k4 = state_derivative(SimState::from(x0 + h * k3), u, d, p);
  return SimState::from(x0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

SimState simulate_interval(const SimState& x, const ControlInput& u,
                           const Disturbance& d, const PlantParams& p,
                           double tau_s, int n_sub) {
  if (n_sub < 1) throw CcdError("simulate_interval: n_sub must be >= 1");
  const double h = tau_s / n_sub;
  SimState xs = x;
  for (int i = 0; i < n_sub; ++i) xs = rk4_step(xs, u, d, p, h);
  return xs;
}

Linearization jacobians(const SimState& x, const ControlInput& u,
                        const Disturbance& d, const PlantParams& p) {
  Linearization lin;
  lin.f0 = state_derivative(x, u, d, p);  // validates the point
  const double mdot_m = u.mdot_f + u.mdot_r;
  const double through = mdot_m - d.mdot_e;
  const double cp = p.c_p;

  auto& A = lin.A;
  auto& Bu = lin.Bu;
  auto& Bd = lin.Bd;
  A.setZero();
  Bu.setZero();
  Bd.setZero();

  // M_f, M_r
  Bu(0, 0) = -1.0;
  Bu(1, 0) = 1.0;
  Bd(1, 2) = -1.0;

  // T_h: C_h dT_h = cp (mdot_f T_f + mdot_r T_r - mdot_m T_h) + Qdot_h
  A(2, 2) = -cp * mdot_m / p.C_h;
  A(2, 4) = cp * u.mdot_r / p.C_h;
  Bu(2, 0) = cp * (p.T_f - x.T_h) / p.C_h;
  Bu(2, 1) = cp * (x.T_r - x.T_h) / p.C_h;
  Bd(2, 0) = 1.0 / p.C_h;

  // T_c
  const double dTc_flow = cp * (x.T_h - x.T_c) / p.C_c;
  A(3, 2) = through * cp / p.C_c;
  A(3, 3) = -(through * cp + 1.0 / p.R_s) / p.C_c;
  Bu(3, 0) = dTc_flow;
  Bu(3, 1) = dTc_flow;
  Bd(3, 1) = 1.0 / (p.R_s * p.C_c);
  Bd(3, 2) = -dTc_flow;

  // T_r
  const double gap = x.T_c - x.T_r;
  A(4, 1) = -through * gap / (x.M_r * x.M_r);
  A(4, 3) = through / x.M_r;
  A(4, 4) = -through / x.M_r;
  Bu(4, 0) = gap / x.M_r;
  Bu(4, 1) = gap / x.M_r;
  Bd(4, 2) = -gap / x.M_r;
  return lin;
}

}  // namespace ccd
