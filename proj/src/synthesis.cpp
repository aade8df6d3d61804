#include "ccd/synthesis.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <string>

namespace ccd {

Vec AffineModel::predict(const Vec& x, const Vec& u, const Vec& d) const {
  return x_e + A * (x - x_e) + Bu * (u - u_e) + Bd * (d - d_e) + e_aff;
}

Mat matrix_exponential(const Mat& M) {
  if (M.rows() != M.cols()) throw DimensionMismatch("matrix_exponential: not square");
  return M.exp();
}

DiscreteMatrices discretize_zoh(const Mat& A_c, const Mat& B_c, double tau_s) {
  if (!(tau_s > 0.0)) throw CcdError("discretize_zoh: sample period must be positive");
  const Eigen::Index n = A_c.rows();
  const Eigen::Index m = B_c.cols();
  if (A_c.cols() != n || B_c.rows() != n) {
    throw DimensionMismatch("discretize_zoh: inconsistent dimensions");
  }
  // [A_d  B_d]   = exp([A_c  B_c] tau)
  // [ 0    I ]         [ 0    0 ]
  Mat aug = Mat::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = A_c * tau_s;
  aug.topRightCorner(n, m) = B_c * tau_s;
  const Mat phi = matrix_exponential(aug);
  return {phi.topLeftCorner(n, n), phi.topRightCorner(n, m)};
}

AffineModel linearize_discrete(const SimState& x, const ControlInput& u,
                               const Disturbance& d, const PlantParams& p,
                               double tau_s) {
  const Linearization lin = jacobians(x, u, d, p);
  Mat Bc(kStates, kInputs + kDisturbances + 1);
  Bc << lin.Bu, lin.Bd, lin.f0;
  const DiscreteMatrices dm = discretize_zoh(lin.A, Bc, tau_s);

  AffineModel model;
  model.A = dm.A;
  model.Bu = dm.B.leftCols(kInputs);
  model.Bd = dm.B.middleCols(kInputs, kDisturbances);
  model.e_aff = dm.B.col(kInputs + kDisturbances);
  model.x_e = x.vec();
  model.u_e = u.vec();
  model.d_e = d.vec();
  model.tau_s = tau_s;
  return model;
}

int controllability_rank(const Mat& A, const Mat& B, double rel_tol) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  Mat ctrb(n, n * m);
  Mat block = B;
  for (Eigen::Index i = 0; i < n; ++i) {
    ctrb.middleCols(i * m, m) = block;
    block = A * block;
  }
  // States carry mixed units (kg, K); equilibrate rows before the rank test.
  for (Eigen::Index r = 0; r < n; ++r) {
    const double s = ctrb.row(r).cwiseAbs().maxCoeff();
    if (s > 0.0) ctrb.row(r) /= s;
  }
  Eigen::JacobiSVD<Mat> svd(ctrb);
  const Vec& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rel_tol * sv(0)) ++rank;
  }
  return rank;
}

namespace {

Mat drop_row_col(const Mat& M, int idx) {
  const Eigen::Index n = M.rows();
  Mat out(n - 1, n - 1);
  for (Eigen::Index r = 0, ro = 0; r < n; ++r) {
    if (r == idx) continue;
    for (Eigen::Index c = 0, co = 0; c < n; ++c) {
      if (c == idx) continue;
      out(ro, co++) = M(r, c);
    }
    ++ro;
  }
  return out;
}

Mat drop_row(const Mat& M, int idx) {
  Mat out(M.rows() - 1, M.cols());
  for (Eigen::Index r = 0, ro = 0; r < M.rows(); ++r) {
    if (r != idx) out.row(ro++) = M.row(r);
  }
  return out;
}

}  // namespace

AffineModel extract_controllable(const AffineModel& model, int drop_index) {
  const int n = model.states();
  if (drop_index < 0 || drop_index >= n) {
    throw DimensionMismatch("extract_controllable: drop index out of range");
  }
  AffineModel red;
  red.A = drop_row_col(model.A, drop_index);
  red.Bu = drop_row(model.Bu, drop_index);
  red.Bd = drop_row(model.Bd, drop_index);
  red.e_aff = drop_row(model.e_aff, drop_index);
  red.x_e = drop_row(model.x_e, drop_index);
  red.u_e = model.u_e;
  red.d_e = model.d_e;
  red.tau_s = model.tau_s;

  const int rank = controllability_rank(red.A, red.Bu);
  if (rank < red.states()) {
    throw NotControllable("reduced model has controllability rank " +
                          std::to_string(rank) + " < " +
                          std::to_string(red.states()));
  }
  return red;
}

LqrResult dlqr(const Mat& A, const Mat& B, const Mat& Q, const Mat& R,
               const RiccatiOptions& options, const Mat* warm_start) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n ||
      R.rows() != B.cols() || R.cols() != B.cols()) {
    throw DimensionMismatch("dlqr: inconsistent dimensions");
  }
  Mat P = warm_start ? *warm_start : Q;
  const Mat At = A.transpose();
  const Mat Bt = B.transpose();
  for (int it = 1; it <= options.max_iter; ++it) {
    const Mat BtP = Bt * P;
    const Mat gain = (R + BtP * B).ldlt().solve(BtP * A);
    Mat next = Q + At * P * A - (At * P * B) * gain;
    next = 0.5 * (next + next.transpose());
    const double change = (next - P).cwiseAbs().maxCoeff();
    P = std::move(next);
    if (!P.allFinite()) break;
    // Relative floor keeps the test meaningful when P is large.
    if (change <= options.tol * std::max(1.0, P.cwiseAbs().maxCoeff())) {
      const Mat K = -(R + Bt * P * B).ldlt().solve(Bt * P * A);
      return {K, P, it};
    }
  }
  throw RiccatiDiverged("Riccati iteration did not converge in " +
                        std::to_string(options.max_iter) + " iterations");
}

double spectral_radius(const Mat& M) {
  Eigen::EigenSolver<Mat> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double dare_residual(const Mat& A, const Mat& B, const Mat& Q, const Mat& R,
                     const Mat& P) {
  const Mat BtPA = B.transpose() * P * A;
  const Mat res = P - A.transpose() * P * A +
                  BtPA.transpose() * (R + B.transpose() * P * B).ldlt().solve(BtPA) - Q;
  return res.cwiseAbs().maxCoeff();
}

}  // namespace ccd
