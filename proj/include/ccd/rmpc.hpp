#pragma once

#include "ccd/qp.hpp"
#include "ccd/synthesis.hpp"

#include <vector>

namespace ccd {

struct RmpcConfig {
  int N_p = 10;
  Mat R_eff = Mat::Identity(kInputs, kInputs);
  BoxSet x_box = BoxSet::unbounded(kReducedStates);  // controlled states
  BoxSet u_box = BoxSet::unbounded(kInputs);
  Vec rate_limit = Vec::Constant(kInputs, kInf);       // |u_i - u_{i-1}|
  BoxSet w_box = BoxSet::point(Vec::Zero(kDisturbances));
  BoxSet mf_box = BoxSet::unbounded(1);  // tracked reservoir mass
  int mf_input = 0;                      // input that drains the reservoir
  QpOptions qp;
};

/// Stacked affine predictions over the horizon, i = 1..N_p:
///
///   x_i = Gx_i C + hx_i + Ex_i W      (absolute predicted state)
///   u_i = Gu_i C + hu_i + Eu_i W      (absolute applied input)
///
/// C stacks c_1..c_{N_p} and W stacks w_1..w_{N_p}. Block row i of the
/// stacked matrices holds step i. u_i is c_i + K (x_{i-1} - x_e) + u_e with
/// x_0 the measured state; w_j first reaches the state at x_j.
struct PredictionMaps {
  int N_p = 0;
  int n = 0;
  int m = 0;
  int q = 0;
  double tau_s = 1.0;
  Mat Gx, Ex;
  Vec hx;
  Mat Gu, Eu;
  Vec hu;
  Vec u_prev;       // input applied before the horizon
  double M_f = 0;   // reservoir mass at the start of the horizon
  Mat Acl;          // A + B_u K

  /// Disturbance-to-state block (A + B_u K)^{i-j} B_d for 1 <= j <= i.
  Mat disturbance_block(int i, int j) const;
};

PredictionMaps build_prediction(const AffineModel& model, const Mat& K,
                                const Vec& x_k, double M_f_k, const Vec& u_prev,
                                const std::vector<Vec>& d_preview);

enum class RowKind { StateUpper, StateLower, InputUpper, InputLower, RateUpper,
                     RateLower, ReservoirUpper, ReservoirLower };

/// Scalar constraints  G C + h + E W <= bound, before any tightening.
struct ConstraintRows {
  Mat G;
  Vec h;
  Mat E;
  Vec bound;
  std::vector<RowKind> kind;
  std::vector<int> step;  // horizon index i of each row

  int size() const { return static_cast<int>(bound.size()); }
};

ConstraintRows constraint_rows(const PredictionMaps& maps, const RmpcConfig& cfg);

/// Worst-case margin of every row over the disturbance box: the box support
/// function sum_j |E_j| w_half + E w_center.
Vec tightening_margins(const ConstraintRows& rows, const BoxSet& w_box, int N_p);

/// Robust counterpart: G C <= bound - h - margin, objective sum c_i' R c_i.
QuadraticProgram tighten_constraints(const PredictionMaps& maps,
                                     const RmpcConfig& cfg);

struct RmpcSolution {
  bool feasible = false;
  Mat C;        // m x N_p, column i-1 holds c_i
  Vec first_move;
  double objective = kInf;
  QpStatus status = QpStatus::Infeasible;
  double max_violation = kInf;
};

RmpcSolution solve_rmpc(const AffineModel& model, const Mat& K, const Vec& x_k,
                        double M_f_k, const Vec& u_prev,
                        const std::vector<Vec>& d_preview, const RmpcConfig& cfg);

class TooLarge : public CcdError {
 public:
  using CcdError::CcdError;
};

/// Brute-force check of the tightening: for a candidate C, the maximum over
/// all vertices of the stacked disturbance box of each row's residual
/// G C + h + E W - bound. Limited to q * N_p <= 18.
Vec worst_case_oracle(const PredictionMaps& maps, const RmpcConfig& cfg,
                      const Vec& C);

}  // namespace ccd
