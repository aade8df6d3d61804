#pragma once

#include "ccd/plant.hpp"

#include <optional>

namespace ccd {

/// Discrete-time affine model in deviation form about (x_e, u_e, d_e):
///
///   x+ = x_e + A (x - x_e) + B_u (u - u_e) + B_d (d - d_e) + e_aff
///
/// e_aff is the state change over one sample when sitting at the
/// linearization point.
struct AffineModel {
  Mat A;
  Mat Bu;
  Mat Bd;
  Vec e_aff;
  Vec x_e;
  Vec u_e;
  Vec d_e;
  double tau_s = 1.0;

  int states() const { return static_cast<int>(A.rows()); }
  int inputs() const { return static_cast<int>(Bu.cols()); }
  int disturbances() const { return static_cast<int>(Bd.cols()); }

  Vec predict(const Vec& x, const Vec& u, const Vec& d) const;
};

class NotControllable : public CcdError {
 public:
  using CcdError::CcdError;
};

class RiccatiDiverged : public CcdError {
 public:
  using CcdError::CcdError;
};

/// exp(M) by scaling and squaring with a Pade approximant.
Mat matrix_exponential(const Mat& M);

struct DiscreteMatrices {
  Mat A;  // n x n
  Mat B;  // n x m, one column per column of the continuous B
};

/// Exact zero-order-hold discretization: exp([[A_c, B_c], [0, 0]] tau).
/// Passing the drift vector as a trailing column of B_c yields the affine
/// offset in the matching column of the result.
DiscreteMatrices discretize_zoh(const Mat& A_c, const Mat& B_c, double tau_s);

/// Linearizes the plant at (x, u, d) and discretizes with period tau_s.
AffineModel linearize_discrete(const SimState& x, const ControlInput& u,
                               const Disturbance& d, const PlantParams& p,
                               double tau_s);

/// Numerical rank of [B, AB, ..., A^{n-1}B] after row equilibration.
int controllability_rank(const Mat& A, const Mat& B, double rel_tol = 1e-9);

/// Deletes state `drop_index` (M_f for this plant) and checks that the
/// remaining subsystem is controllable through B_u.
AffineModel extract_controllable(const AffineModel& model, int drop_index);

inline constexpr int kReservoirMassIndex = 0;

struct LqrResult {
  Mat K;  // m x n, applied as u = K x
  Mat P;
  int iterations = 0;
};

struct RiccatiOptions {
  double tol = 1e-12;
  int max_iter = 10000;
};

/// Discrete LQR by fixed-point iteration on the Riccati recursion. The gain
/// carries the feedback sign: the closed loop is A + B K. `warm_start`
/// replaces the default initial iterate P = Q.
LqrResult dlqr(const Mat& A, const Mat& B, const Mat& Q, const Mat& R,
               const RiccatiOptions& options = {},
               const Mat* warm_start = nullptr);

double spectral_radius(const Mat& M);

/// Largest absolute entry of the DARE residual at P.
double dare_residual(const Mat& A, const Mat& B, const Mat& Q, const Mat& R,
                     const Mat& P);

}  // namespace ccd
