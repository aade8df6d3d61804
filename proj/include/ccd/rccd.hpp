#pragma once

#include "ccd/profile.hpp"
#include "ccd/rmpc.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ccd {

/// Plant parameters, initial state and initial input: the 11 outer-loop
/// decision variables, ordered
/// [C_c, C_h, T_f, R_s, M_f0, M_r0, T_h0, T_c0, T_r0, mdot_f0, mdot_r0].
struct DesignVector {
  PlantParams p;
  SimState x0;
  ControlInput u0;

  static constexpr int kSize = 11;
  Vec to_vec() const;
  static DesignVector from_vec(const Vec& v, double c_p);
};

/// J_sys = (C_c + C_h) / c_p + M_f0 + M_r0, the initial working-fluid mass.
double objective(const DesignVector& dv, double c_p);
double objective(const PlantParams& p, const SimState& x0);

struct LqrConfig {
  Mat Q = Eigen::Vector4d(1.0, 10.0, 10.0, 10.0).asDiagonal();
  Mat R = Mat::Identity(kInputs, kInputs);
  RiccatiOptions riccati;
};

/// Everything a rollout needs besides the design itself.
struct ProblemSetup {
  DisturbanceProfile profile;
  double c_p = kWaterCp;
  int n_sub = 10;
  BoxSet state_box = BoxSet::unbounded(kStates);  // X over the full state
  RmpcConfig rmpc;  // U, rate limit and W live here
  LqrConfig lqr;
  double state_tol = 1e-9;

  int steps() const { return profile.size(); }
  double tau_s() const { return profile.sample_period(); }
  /// Copies the controlled-state rows of state_box into rmpc.x_box and the
  /// reservoir row into rmpc.mf_box.
  void sync_rmpc_boxes();
};

struct Schedules {
  std::vector<Vec> C_star;  // feedforward c_k (m)
  std::vector<Mat> K_star;  // gains (m x 4)
  std::vector<Vec> x_e;     // linearization state, controlled coordinates
  std::vector<Vec> u_e;     // linearization input

  int size() const { return static_cast<int>(C_star.size()); }
  bool has_gains() const { return !K_star.empty(); }
};

struct StepViolation {
  int k = 0;          // step whose end state x_{k+1} left X
  int state = 0;      // index into [M_f, M_r, T_h, T_c, T_r]
  double excess = 0;  // distance outside the bound
};

struct RolloutResult {
  bool feasible = false;
  double J_sys = kInf;
  std::vector<SimState> trajectory;       // x_1 .. x_{n+1}; x_1 = x0
  std::vector<ControlInput> applied_u;    // u_1 .. u_n
  std::vector<int> h;                     // rMPC verdict per solved step
  Schedules schedules;
  std::optional<int> first_infeasible_k;
  std::vector<StepViolation> violations;
  int clip_events = 0;
  std::string diagnostic;

  int violation_count(int state) const;
  double max_excess(int state) const;
};

inline constexpr int kIndexMf = 0;
inline constexpr int kIndexMr = 1;
inline constexpr int kIndexTh = 2;

/// Nominal inner loop: per step linearize, discretize, reduce, LQR, rMPC,
/// apply c_1 + K (x - x_e) + u_e and simulate the nonlinear plant. Stops at
/// the first infeasible step.
RolloutResult inner_rollout(const DesignVector& dv, const ProblemSetup& setup);

/// Replays stored schedules without online optimization. Applied inputs are
/// clipped to U and to the rate limit; constraint violations are recorded.
RolloutResult closed_loop_replay(const Schedules& schedules, const SimState& x0,
                                 const ControlInput& u0,
                                 const DisturbanceProfile& actual,
                                 const PlantParams& p, const ProblemSetup& setup);

/// Plays a fixed input sequence verbatim and records violations.
RolloutResult open_loop_replay(const std::vector<ControlInput>& inputs,
                               const SimState& x0, const DisturbanceProfile& actual,
                               const PlantParams& p, const ProblemSetup& setup);

/// True iff every stored h is 0, the rollout covered all steps and every
/// stored end state lies in X. Recomputed from the stored data.
bool recheck_feasibility(const RolloutResult& r, const ProblemSetup& setup);

struct PatternSearchOptions {
  double mesh_init = 0.25;
  double mesh_min = 1e-3;
  double mesh_max = 0.5;
  double obj_tol = 1e-4;
  int max_evals = 5000;
  bool random_directions = true;
  std::uint64_t seed = 1;
  int threads = 1;
  int poll_batch = 1;
};

struct SearchTrace {
  int evaluations = 0;
  int iterations = 0;
  std::vector<double> accepted;  // objective of each accepted incumbent
  double final_mesh = 0.0;
};

class NoFeasiblePoint : public CcdError {
 public:
  NoFeasiblePoint(const std::string& what, std::optional<int> first_infeasible_k)
      : CcdError(what), first_infeasible_k(first_infeasible_k) {}

  /// Deepest step reached by the best rollout before it failed.
  std::optional<int> first_infeasible_k;
};

/// Scaled design space: every variable mapped affinely onto [0, 1].
struct DesignBounds {
  BoxSet box{Vec::Zero(DesignVector::kSize), Vec::Zero(DesignVector::kSize)};

  Vec to_unit(const Vec& v) const;
  Vec from_unit(const Vec& s) const;
};

struct DesignResult {
  std::string algorithm;  // "rccd" or "olccd"
  DesignVector design;
  double J_sys = kInf;
  RolloutResult rollout;
  SearchTrace trace;
  double constraint_violation = 0.0;
};

/// Mesh-adaptive pattern search over the scaled design vector. Infeasible
/// rollouts are rejected outright (extreme barrier); until a feasible point
/// is known the search maximizes the number of steps survived.
DesignResult outer_optimize(const DesignVector& initial, const DesignBounds& bounds,
                            const ProblemSetup& setup,
                            const PatternSearchOptions& options);

}  // namespace ccd
