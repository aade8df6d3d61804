#pragma once

// Independent reference computations used by the unit tests and the
// acceptance runner. Nothing here calls the routine it is checking.

#include "ccd/plant.hpp"
#include "ccd/rmpc.hpp"
#include "ccd/synthesis.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using ccd::Mat;
using ccd::Vec;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Mat random_matrix(std::mt19937_64& rng, int r, int c, double scale = 1.0) {
  Mat M(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) M(i, j) = uniform(rng, -scale, scale);
  }
  return M;
}

/// Random Hurwitz matrix: shifted so that every eigenvalue has real part <= -0.1.
inline Mat random_stable(std::mt19937_64& rng, int n) {
  Mat A = random_matrix(rng, n, n);
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Mat>(A).eigenvalues();
  double max_re = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) max_re = std::max(max_re, ev(i).real());
  return A - (max_re + uniform(rng, 0.1, 1.0)) * Mat::Identity(n, n);
}

/// x' = A_c x + B_c u with u held constant, integrated by classic RK4.
inline Vec rk4_linear(const Mat& A_c, const Mat& B_c, const Vec& x0, const Vec& u,
                      double tau, int substeps) {
  const double h = tau / substeps;
  auto f = [&](const Vec& x) -> Vec { return A_c * x + B_c * u; };
  Vec x = x0;
  for (int s = 0; s < substeps; ++s) {
    const Vec k1 = f(x);
    const Vec k2 = f(x + 0.5 * h * k1);
    const Vec k3 = f(x + 0.5 * h * k2);
    const Vec k4 = f(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

/// Scalar DARE p = a^2 p - (abp)^2/(r + b^2 p) + q, positive root.
struct ScalarDare {
  double P;
  double K;
};

inline ScalarDare scalar_dare(double a, double b, double q, double r) {
  // b^2 p^2 + (r - a^2 r - q b^2) p - q r = 0
  const double A = b * b;
  const double B = r - a * a * r - q * b * b;
  const double C = -q * r;
  const double P = (-B + std::sqrt(B * B - 4.0 * A * C)) / (2.0 * A);
  return {P, -(b * P * a) / (r + b * b * P)};
}

/// Central-difference Jacobian of the plant rates.
inline ccd::Linearization fd_jacobians(const ccd::SimState& x, const ccd::ControlInput& u,
                                       const ccd::Disturbance& d, const ccd::PlantParams& p) {
  ccd::Linearization lin;
  lin.f0 = ccd::state_derivative(x, u, d, p);
  auto step = [](double v) { return 1e-6 * std::max(1.0, std::abs(v)); };
  const ccd::StateVec xv = x.vec();
  for (int j = 0; j < ccd::kStates; ++j) {
    ccd::StateVec a = xv, b = xv;
    const double h = step(xv(j));
    a(j) += h;
    b(j) -= h;
    lin.A.col(j) = (ccd::state_derivative(ccd::SimState::from(a), u, d, p) -
                    ccd::state_derivative(ccd::SimState::from(b), u, d, p)) / (2 * h);
  }
  const ccd::InputVec uv = u.vec();
  for (int j = 0; j < ccd::kInputs; ++j) {
    ccd::InputVec a = uv, b = uv;
    const double h = step(uv(j)) * 1e-2;
    a(j) += h;
    b(j) -= h;
    lin.Bu.col(j) = (ccd::state_derivative(x, ccd::ControlInput::from(a), d, p) -
                     ccd::state_derivative(x, ccd::ControlInput::from(b), d, p)) / (2 * h);
  }
  const ccd::DistVec dv = d.vec();
  for (int j = 0; j < ccd::kDisturbances; ++j) {
    ccd::DistVec a = dv, b = dv;
    const double h = j == 2 ? 1e-8 : step(dv(j));
    a(j) += h;
    b(j) -= h;
    lin.Bd.col(j) = (ccd::state_derivative(x, u, ccd::Disturbance::from(a), p) -
                     ccd::state_derivative(x, u, ccd::Disturbance::from(b), p)) / (2 * h);
  }
  return lin;
}

/// Entrywise error |a - f| / max(|a|, 1): relative for large entries, absolute
/// near zero where a relative measure is meaningless.
inline double scaled_error(const Mat& analytic, const Mat& fd) {
  double e = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double a = analytic.data()[i];
    e = std::max(e, std::abs(a - fd.data()[i]) / std::max(std::abs(a), 1.0));
  }
  return e;
}

/// Dual value of a strictly convex QP after accelerated projected gradient on
/// the multipliers. The dual value is a lower bound on the primal optimum.
inline double dual_projected_gradient(const ccd::QuadraticProgram& qp, int iterations) {
  const Mat Hinv = qp.H.inverse();
  const Mat M = qp.A_in * Hinv * qp.A_in.transpose();
  const Vec r = qp.A_in * Hinv * qp.g + qp.b_in;
  const double L = Eigen::SelfAdjointEigenSolver<Mat>(M).eigenvalues().maxCoeff();
  auto dual = [&](const Vec& l) {
    const Vec v = qp.g + qp.A_in.transpose() * l;
    return -0.5 * v.dot(Hinv * v) - qp.b_in.dot(l);
  };
  Vec lam = Vec::Zero(qp.constraints());
  Vec y = lam;
  double t = 1.0;
  for (int it = 0; it < iterations; ++it) {
    // gradient of the negated dual: M l + r
    const Vec next = (y - (M * y + r) / L).cwiseMax(0.0);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - lam);
    lam = next;
    t = t_next;
  }
  return dual(lam);
}

/// Robust MPC by brute force: every vertex of the stacked disturbance box is
/// simulated step by step through model.predict, and every constraint must
/// hold for every vertex. Returns the resulting QP (one row per constraint per
/// vertex) in the feedforward sequence C = [c_1; ...; c_N].
inline ccd::QuadraticProgram vertex_expanded_qp(const ccd::AffineModel& model, const Mat& K,
                                                const Vec& x_k, double M_f_k,
                                                const Vec& u_prev,
                                                const std::vector<Vec>& preview,
                                                const ccd::RmpcConfig& cfg) {
  const int N = static_cast<int>(preview.size());
  const int m = model.inputs();
  const int n = model.states();
  const int q = model.disturbances();
  const int nz = m * N;
  const int dims = q * N;

  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  auto add = [&](const Eigen::RowVectorXd& a, double value_at_zero, double bound) {
    // a C + value_at_zero <= bound
    if (std::isfinite(bound)) {
      rows.push_back(a);
      rhs.push_back(bound - value_at_zero);
    }
  };

  for (std::uint32_t mask = 0; mask < (1u << dims); ++mask) {
    std::vector<Vec> w(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
      w[static_cast<std::size_t>(i)].resize(q);
      for (int s = 0; s < q; ++s) {
        const int b = i * q + s;
        w[static_cast<std::size_t>(i)](s) =
            (mask >> b) & 1u ? cfg.w_box.upper(s) : cfg.w_box.lower(s);
      }
    }
    // Everything is affine in C: simulate at C = 0 and at each unit vector.
    auto simulate = [&](const Vec& C, std::vector<Vec>& xs, std::vector<Vec>& us) {
      Vec x = x_k;
      xs.clear();
      us.clear();
      for (int i = 0; i < N; ++i) {
        const Vec u = C.segment(i * m, m) + K * (x - model.x_e) + model.u_e;
        x = model.predict(x, u, preview[static_cast<std::size_t>(i)] +
                                    w[static_cast<std::size_t>(i)]);
        us.push_back(u);
        xs.push_back(x);
      }
    };
    std::vector<Vec> x0s, u0s;
    simulate(Vec::Zero(nz), x0s, u0s);
    std::vector<std::vector<Vec>> dxs(static_cast<std::size_t>(nz)),
        dus(static_cast<std::size_t>(nz));
    for (int j = 0; j < nz; ++j) {
      std::vector<Vec> xs, us;
      simulate(Vec::Unit(nz, j), xs, us);
      for (int i = 0; i < N; ++i) {
        xs[static_cast<std::size_t>(i)] -= x0s[static_cast<std::size_t>(i)];
        us[static_cast<std::size_t>(i)] -= u0s[static_cast<std::size_t>(i)];
      }
      dxs[static_cast<std::size_t>(j)] = xs;
      dus[static_cast<std::size_t>(j)] = us;
    }
    auto coeff = [&](const std::vector<std::vector<Vec>>& d, int i, int s) {
      Eigen::RowVectorXd a(nz);
      for (int j = 0; j < nz; ++j) a(j) = d[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)](s);
      return a;
    };

    Eigen::RowVectorXd mf_a = Eigen::RowVectorXd::Zero(nz);
    double mf_0 = M_f_k;
    for (int i = 0; i < N; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      for (int s = 0; s < n; ++s) {
        const Eigen::RowVectorXd a = coeff(dxs, i, s);
        add(a, x0s[ui](s), cfg.x_box.upper(s));
        add(-a, -x0s[ui](s), -cfg.x_box.lower(s));
      }
      for (int c = 0; c < m; ++c) {
        const Eigen::RowVectorXd a = coeff(dus, i, c);
        add(a, u0s[ui](c), cfg.u_box.upper(c));
        add(-a, -u0s[ui](c), -cfg.u_box.lower(c));
        Eigen::RowVectorXd da = a;
        double d0 = u0s[ui](c);
        if (i == 0) {
          d0 -= u_prev(c);
        } else {
          da -= coeff(dus, i - 1, c);
          d0 -= u0s[ui - 1](c);
        }
        add(da, d0, cfg.rate_limit(c));
        add(-da, -d0, cfg.rate_limit(c));
      }
      mf_a -= model.tau_s * coeff(dus, i, cfg.mf_input);
      mf_0 -= model.tau_s * u0s[ui](cfg.mf_input);
      add(mf_a, mf_0, cfg.mf_box.upper(0));
      add(-mf_a, -mf_0, -cfg.mf_box.lower(0));
    }
  }

  ccd::QuadraticProgram qp;
  qp.H = Mat::Zero(nz, nz);
  for (int i = 0; i < N; ++i) qp.H.block(i * m, i * m, m, m) = 2.0 * cfg.R_eff;
  qp.g = Vec::Zero(nz);
  qp.A_in.resize(static_cast<Eigen::Index>(rows.size()), nz);
  qp.b_in.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    qp.A_in.row(static_cast<Eigen::Index>(r)) = rows[r];
    qp.b_in(static_cast<Eigen::Index>(r)) = rhs[r];
  }
  return qp;
}

/// Random small robust MPC instance with finite boxes on every channel.
struct RmpcInstance {
  ccd::AffineModel model;
  Mat K;
  Vec x_k;
  double M_f = 0.0;
  Vec u_prev;
  std::vector<Vec> preview;
  ccd::RmpcConfig cfg;
};

inline RmpcInstance random_rmpc_instance(std::mt19937_64& rng) {
  RmpcInstance in;
  const int n = 1 + static_cast<int>(rng() % 3);
  const int m = 1 + static_cast<int>(rng() % 2);
  const int q = 1 + static_cast<int>(rng() % 3);
  const int N = 1 + static_cast<int>(rng() % 3);
  ccd::AffineModel& md = in.model;
  md.A = 0.9 * random_matrix(rng, n, n, 0.6);
  md.Bu = random_matrix(rng, n, m);
  md.Bd = random_matrix(rng, n, q, 0.5);
  md.e_aff = random_matrix(rng, n, 1, 0.1);
  md.x_e = random_matrix(rng, n, 1);
  md.u_e = random_matrix(rng, m, 1, 0.2);
  md.d_e = random_matrix(rng, q, 1);
  md.tau_s = uniform(rng, 0.5, 1.5);
  in.K = random_matrix(rng, m, n, 0.3);
  in.x_k = md.x_e + random_matrix(rng, n, 1, 0.5);
  in.u_prev = md.u_e;
  in.M_f = uniform(rng, 0.5, 2.0);
  for (int i = 0; i < N; ++i) in.preview.push_back(md.d_e + random_matrix(rng, q, 1, 0.2));

  ccd::RmpcConfig& c = in.cfg;
  c.N_p = N;
  c.R_eff = Vec::NullaryExpr(m, [&] { return uniform(rng, 0.5, 2.0); }).asDiagonal();
  Vec xc = md.x_e + random_matrix(rng, n, 1, 0.5);
  Vec xw = Vec::NullaryExpr(n, [&] { return uniform(rng, 0.05, 1.0); });
  c.x_box = ccd::BoxSet(xc - xw, xc + xw);
  Vec uw = Vec::NullaryExpr(m, [&] { return uniform(rng, 0.2, 1.0); });
  c.u_box = ccd::BoxSet(md.u_e - uw, md.u_e + uw);
  c.rate_limit = Vec::NullaryExpr(m, [&] { return uniform(rng, 0.3, 2.0); });
  const Vec wc = random_matrix(rng, q, 1, 0.05);
  const Vec wh = Vec::NullaryExpr(q, [&] { return uniform(rng, 0.0, 0.3); });
  c.w_box = ccd::BoxSet(wc - wh, wc + wh);
  c.mf_box = ccd::BoxSet(Vec::Constant(1, 0.0), Vec::Constant(1, 5.0));
  c.mf_input = 0;
  return in;
}

}  // namespace oracle
