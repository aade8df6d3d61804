#include "ccd/rccd.hpp"

#include <algorithm>
#include <cmath>

namespace ccd {

Vec DesignVector::to_vec() const {
  Vec v(kSize);
  v << p.C_c, p.C_h, p.T_f, p.R_s, x0.M_f, x0.M_r, x0.T_h, x0.T_c, x0.T_r, u0.mdot_f,
      u0.mdot_r;
  return v;
}

DesignVector DesignVector::from_vec(const Vec& v, double c_p) {
  if (v.size() != kSize) throw DimensionMismatch("DesignVector: expected 11 entries");
  DesignVector dv;
  dv.p = {v(0), v(1), v(2), v(3), c_p};
  dv.x0 = {v(4), v(5), v(6), v(7), v(8)};
  dv.u0 = {v(9), v(10)};
  return dv;
}

double objective(const PlantParams& p, const SimState& x0) {
  return (p.C_c + p.C_h) / p.c_p + x0.M_f + x0.M_r;
}

double objective(const DesignVector& dv, double c_p) {
  if (!(c_p > 0.0)) throw CcdError("objective: c_p must be positive");
  return (dv.p.C_c + dv.p.C_h) / c_p + dv.x0.M_f + dv.x0.M_r;
}

void ProblemSetup::sync_rmpc_boxes() {
  rmpc.mf_box = BoxSet(state_box.lower.segment(0, 1), state_box.upper.segment(0, 1));
  rmpc.x_box = BoxSet(state_box.lower.segment(1, kReducedStates),
                      state_box.upper.segment(1, kReducedStates));
}

int RolloutResult::violation_count(int state) const {
  return static_cast<int>(std::count_if(violations.begin(), violations.end(),
                                        [state](const StepViolation& v) {
                                          return v.state == state;
                                        }));
}

double RolloutResult::max_excess(int state) const {
  double worst = 0.0;
  for (const auto& v : violations) {
    if (v.state == state) worst = std::max(worst, v.excess);
  }
  return worst;
}

namespace {

// Clipping below this size is QP round-off, not a saturation event.
constexpr double kClipTol = 1e-9;

std::vector<Vec> preview(const DisturbanceProfile& D, int k, int N_p) {
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(N_p));
  for (int i = 0; i < N_p; ++i) out.push_back(D.at_or_last(k + i).vec());
  return out;
}

void record_violations(const SimState& x, int k, const BoxSet& box, double tol,
                       std::vector<StepViolation>& out) {
  const StateVec v = x.vec();
  for (int s = 0; s < kStates; ++s) {
    const double excess = std::max(box.lower(s) - v(s), v(s) - box.upper(s));
    if (excess > tol) out.push_back({k, s, excess});
  }
}

}  // namespace

RolloutResult inner_rollout(const DesignVector& dv, const ProblemSetup& setup) {
  const int n_t = setup.steps();
  const double tau = setup.tau_s();
  const RmpcConfig& cfg = setup.rmpc;

  RolloutResult out;
  out.J_sys = objective(dv, setup.c_p);
  out.trajectory.reserve(static_cast<std::size_t>(n_t + 1));
  out.trajectory.push_back(dv.x0);

  SimState x = dv.x0;
  ControlInput u_prev = dv.u0;
  Mat P_prev;
  auto fail = [&out](int k, std::string why) {
    out.first_infeasible_k = k;
    out.diagnostic = std::move(why);
    out.feasible = false;
    return out;
  };

  for (int k = 1; k <= n_t; ++k) {
    const Disturbance& d_k = setup.profile.at(k);
    Vec c1;
    Mat K;
    AffineModel reduced;
    try {
      const AffineModel full = linearize_discrete(x, u_prev, d_k, dv.p, tau);
      reduced = extract_controllable(full, kReservoirMassIndex);
      const LqrResult lqr = dlqr(reduced.A, reduced.Bu, setup.lqr.Q, setup.lqr.R,
                                 setup.lqr.riccati, P_prev.size() ? &P_prev : nullptr);
      K = lqr.K;
      P_prev = lqr.P;
      const RmpcSolution rs = solve_rmpc(reduced, K, x.reduced(), x.M_f, u_prev.vec(),
                                         preview(setup.profile, k, cfg.N_p), cfg);
      if (!rs.feasible) {
        out.h.push_back(1);
        return fail(k, std::string("rMPC ") + to_string(rs.status) + " at step " +
                           std::to_string(k));
      }
      c1 = rs.first_move;
    } catch (const CcdError& e) {
      out.h.push_back(1);
      return fail(k, e.what());
    }
    out.h.push_back(0);

    // x_e = x_k, so the feedback term vanishes on the nominal rollout.
    const Vec u_raw = c1 + K * (x.reduced() - reduced.x_e) + reduced.u_e;
    const Vec u_clip = cfg.u_box.clamp(u_raw);
    if ((u_clip - u_raw).cwiseAbs().maxCoeff() > kClipTol) ++out.clip_events;
    const ControlInput u = ControlInput::from(u_clip);

    out.schedules.C_star.push_back(c1);
    out.schedules.K_star.push_back(K);
    out.schedules.x_e.push_back(reduced.x_e);
    out.schedules.u_e.push_back(reduced.u_e);
    out.applied_u.push_back(u);

    try {
      x = simulate_interval(x, u, d_k, dv.p, tau, setup.n_sub);
    } catch (const CcdError& e) {
      return fail(k, e.what());
    }
    out.trajectory.push_back(x);
    record_violations(x, k, setup.state_box, setup.state_tol, out.violations);
    if (!out.violations.empty()) {
      return fail(k, "state left X after step " + std::to_string(k));
    }
    u_prev = u;
  }
  out.feasible = true;
  return out;
}

RolloutResult closed_loop_replay(const Schedules& schedules, const SimState& x0,
                                 const ControlInput& u0,
                                 const DisturbanceProfile& actual,
                                 const PlantParams& p, const ProblemSetup& setup) {
  if (schedules.size() != actual.size() || !schedules.has_gains()) {
    throw DimensionMismatch("closed_loop_replay: schedule length " +
                            std::to_string(schedules.size()) +
                            " does not match profile length " +
                            std::to_string(actual.size()));
  }
  const RmpcConfig& cfg = setup.rmpc;
  RolloutResult out;
  out.J_sys = objective(p, x0);
  out.schedules = schedules;
  out.trajectory.push_back(x0);
  SimState x = x0;
  Vec u_prev = u0.vec();
  for (int k = 1; k <= actual.size(); ++k) {
    const auto i = static_cast<std::size_t>(k - 1);
    Vec u = schedules.C_star[i] + schedules.K_star[i] * (x.reduced() - schedules.x_e[i]) +
            schedules.u_e[i];
    Vec lim = u;
    for (int c = 0; c < u.size(); ++c) {
      const double r = cfg.rate_limit(c);
      lim(c) = std::clamp(u(c), u_prev(c) - r, u_prev(c) + r);
    }
    lim = cfg.u_box.clamp(lim);
    if ((lim - u).cwiseAbs().maxCoeff() > kClipTol) ++out.clip_events;
    const ControlInput uk = ControlInput::from(lim);
    out.applied_u.push_back(uk);
    try {
      x = simulate_interval(x, uk, actual.at(k), p, actual.sample_period(), setup.n_sub);
    } catch (const CcdError& e) {
      out.diagnostic = e.what();
      out.first_infeasible_k = k;
      return out;
    }
    out.trajectory.push_back(x);
    record_violations(x, k, setup.state_box, setup.state_tol, out.violations);
    u_prev = lim;
  }
  out.feasible = out.violations.empty();
  if (!out.violations.empty()) out.first_infeasible_k = out.violations.front().k;
  return out;
}

RolloutResult open_loop_replay(const std::vector<ControlInput>& inputs,
                               const SimState& x0, const DisturbanceProfile& actual,
                               const PlantParams& p, const ProblemSetup& setup) {
  if (static_cast<int>(inputs.size()) != actual.size()) {
    throw DimensionMismatch("open_loop_replay: input sequence length " +
                            std::to_string(inputs.size()) +
                            " does not match profile length " +
                            std::to_string(actual.size()));
  }
  RolloutResult out;
  out.J_sys = objective(p, x0);
  out.trajectory.push_back(x0);
  SimState x = x0;
  for (int k = 1; k <= actual.size(); ++k) {
    const ControlInput& u = inputs[static_cast<std::size_t>(k - 1)];
    out.applied_u.push_back(u);
    try {
      x = simulate_interval(x, u, actual.at(k), p, actual.sample_period(), setup.n_sub);
    } catch (const CcdError& e) {
      out.diagnostic = e.what();
      out.first_infeasible_k = k;
      return out;
    }
    out.trajectory.push_back(x);
    record_violations(x, k, setup.state_box, setup.state_tol, out.violations);
  }
  out.feasible = out.violations.empty();
  if (!out.violations.empty()) out.first_infeasible_k = out.violations.front().k;
  return out;
}

bool recheck_feasibility(const RolloutResult& r, const ProblemSetup& setup) {
  if (static_cast<int>(r.h.size()) != setup.steps()) return false;
  if (std::any_of(r.h.begin(), r.h.end(), [](int h) { return h != 0; })) return false;
  if (static_cast<int>(r.trajectory.size()) != setup.steps() + 1) return false;
  for (std::size_t k = 1; k < r.trajectory.size(); ++k) {
    if (!setup.state_box.contains(r.trajectory[k].vec(), setup.state_tol)) return false;
  }
  return true;
}

}  // namespace ccd
