#include "ccd/rmpc.hpp"

#include <cmath>
#include <string>

namespace ccd {

Mat PredictionMaps::disturbance_block(int i, int j) const {
  return Ex.block((i - 1) * n, (j - 1) * q, n, q);
}

PredictionMaps build_prediction(const AffineModel& model, const Mat& K,
                                const Vec& x_k, double M_f_k, const Vec& u_prev,
                                const std::vector<Vec>& d_preview) {
  const int n = model.states();
  const int m = model.inputs();
  const int q = model.disturbances();
  const int N = static_cast<int>(d_preview.size());
  if (N < 1) throw DimensionMismatch("build_prediction: empty disturbance preview");
  if (K.rows() != m || K.cols() != n || x_k.size() != n || u_prev.size() != m) {
    throw DimensionMismatch("build_prediction: inconsistent dimensions");
  }

  PredictionMaps pm;
  pm.N_p = N;
  pm.n = n;
  pm.m = m;
  pm.q = q;
  pm.tau_s = model.tau_s;
  pm.u_prev = u_prev;
  pm.M_f = M_f_k;
  pm.Acl = model.A + model.Bu * K;
  pm.Gx = Mat::Zero(n * N, m * N);
  pm.Ex = Mat::Zero(n * N, q * N);
  pm.hx = Vec::Zero(n * N);
  pm.Gu = Mat::Zero(m * N, m * N);
  pm.Eu = Mat::Zero(m * N, q * N);
  pm.hu = Vec::Zero(m * N);

  // Deviation recursion from dx_0 = x_k - x_e.
  Mat Gx_prev = Mat::Zero(n, m * N);
  Mat Ex_prev = Mat::Zero(n, q * N);
  Vec hx_prev = x_k - model.x_e;
  for (int i = 1; i <= N; ++i) {
    const Vec& d = d_preview[static_cast<std::size_t>(i - 1)];
    if (d.size() != q) throw DimensionMismatch("build_prediction: disturbance size");

    Mat Gu_i = K * Gx_prev;
    Gu_i.middleCols((i - 1) * m, m) += Mat::Identity(m, m);
    const Mat Eu_i = K * Ex_prev;
    const Vec hu_i = K * hx_prev;

    Mat Gx_i = model.A * Gx_prev + model.Bu * Gu_i;
    Mat Ex_i = model.A * Ex_prev + model.Bu * Eu_i;
    Ex_i.middleCols((i - 1) * q, q) += model.Bd;
    Vec hx_i = model.A * hx_prev + model.Bu * hu_i + model.Bd * (d - model.d_e) +
               model.e_aff;

    pm.Gu.middleRows((i - 1) * m, m) = Gu_i;
    pm.Eu.middleRows((i - 1) * m, m) = Eu_i;
    pm.hu.segment((i - 1) * m, m) = hu_i + model.u_e;
    pm.Gx.middleRows((i - 1) * n, n) = Gx_i;
    pm.Ex.middleRows((i - 1) * n, n) = Ex_i;
    pm.hx.segment((i - 1) * n, n) = hx_i + model.x_e;

    Gx_prev = std::move(Gx_i);
    Ex_prev = std::move(Ex_i);
    hx_prev = std::move(hx_i);
  }
  return pm;
}

namespace {

struct RowBuilder {
  ConstraintRows& rows;
  int count = 0;

  void add(const Eigen::Ref<const Eigen::RowVectorXd>& G, double h,
           const Eigen::Ref<const Eigen::RowVectorXd>& E, double bound, RowKind kind,
           int step) {
    rows.G.row(count) = G;
    rows.h(count) = h;
    rows.E.row(count) = E;
    rows.bound(count) = bound;
    rows.kind.push_back(kind);
    rows.step.push_back(step);
    ++count;
  }

  // Emits value <= hi and -value <= -lo for the finite sides.
  void add_interval(const Eigen::RowVectorXd& G, double h, const Eigen::RowVectorXd& E,
                    double lo, double hi, RowKind upper, RowKind lower, int step) {
    if (std::isfinite(hi)) add(G, h, E, hi, upper, step);
    if (std::isfinite(lo)) add(-G, -h, -E, -lo, lower, step);
  }
};

int count_finite(const Vec& v) {
  int c = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) c += std::isfinite(v(i)) ? 1 : 0;
  return c;
}

}  // namespace

ConstraintRows constraint_rows(const PredictionMaps& pm, const RmpcConfig& cfg) {
  const int N = pm.N_p;
  const int n = pm.n;
  const int m = pm.m;
  if (cfg.x_box.dim() != n || cfg.u_box.dim() != m || cfg.rate_limit.size() != m ||
      cfg.w_box.dim() != pm.q) {
    throw DimensionMismatch("constraint_rows: configuration does not match model");
  }
  const int per_step = count_finite(cfg.x_box.lower) + count_finite(cfg.x_box.upper) +
                       count_finite(cfg.u_box.lower) + count_finite(cfg.u_box.upper) +
                       2 * count_finite(cfg.rate_limit) +
                       count_finite(cfg.mf_box.lower) + count_finite(cfg.mf_box.upper);
  ConstraintRows rows;
  const int total = per_step * N;
  rows.G = Mat::Zero(total, m * N);
  rows.h = Vec::Zero(total);
  rows.E = Mat::Zero(total, pm.q * N);
  rows.bound = Vec::Zero(total);
  RowBuilder rb{rows};

  // Reservoir mass M_{f,i+1} = M_f - tau * sum_{l<=i} u_l[mf_input].
  Eigen::RowVectorXd mf_G = Eigen::RowVectorXd::Zero(m * N);
  Eigen::RowVectorXd mf_E = Eigen::RowVectorXd::Zero(pm.q * N);
  double mf_h = pm.M_f;

  for (int i = 1; i <= N; ++i) {
    for (int s = 0; s < n; ++s) {
      const int r = (i - 1) * n + s;
      rb.add_interval(pm.Gx.row(r), pm.hx(r), pm.Ex.row(r), cfg.x_box.lower(s),
                      cfg.x_box.upper(s), RowKind::StateUpper, RowKind::StateLower, i);
    }
    for (int c = 0; c < m; ++c) {
      const int r = (i - 1) * m + c;
      rb.add_interval(pm.Gu.row(r), pm.hu(r), pm.Eu.row(r), cfg.u_box.lower(c),
                      cfg.u_box.upper(c), RowKind::InputUpper, RowKind::InputLower, i);
      if (std::isfinite(cfg.rate_limit(c))) {
        Eigen::RowVectorXd G = pm.Gu.row(r);
        Eigen::RowVectorXd E = pm.Eu.row(r);
        double h = pm.hu(r);
        if (i == 1) {
          h -= pm.u_prev(c);
        } else {
          G -= pm.Gu.row(r - m);
          E -= pm.Eu.row(r - m);
          h -= pm.hu(r - m);
        }
        rb.add_interval(G, h, E, -cfg.rate_limit(c), cfg.rate_limit(c),
                        RowKind::RateUpper, RowKind::RateLower, i);
      }
    }
    const int r = (i - 1) * m + cfg.mf_input;
    mf_G -= pm.tau_s * pm.Gu.row(r);
    mf_E -= pm.tau_s * pm.Eu.row(r);
    mf_h -= pm.tau_s * pm.hu(r);
    rb.add_interval(mf_G, mf_h, mf_E, cfg.mf_box.lower(0), cfg.mf_box.upper(0),
                    RowKind::ReservoirUpper, RowKind::ReservoirLower, i);
  }
  return rows;
}

Vec tightening_margins(const ConstraintRows& rows, const BoxSet& w_box, int N_p) {
  const Vec center = w_box.center().replicate(N_p, 1);
  const Vec half = w_box.half_width().replicate(N_p, 1);
  return rows.E * center + rows.E.cwiseAbs() * half;
}

QuadraticProgram tighten_constraints(const PredictionMaps& maps,
                                     const RmpcConfig& cfg) {
  const ConstraintRows rows = constraint_rows(maps, cfg);
  const Vec margin = tightening_margins(rows, cfg.w_box, maps.N_p);
  QuadraticProgram qp;
  const int nz = maps.m * maps.N_p;
  qp.H = Mat::Zero(nz, nz);
  for (int i = 0; i < maps.N_p; ++i) {
    qp.H.block(i * maps.m, i * maps.m, maps.m, maps.m) = 2.0 * cfg.R_eff;
  }
  qp.g = Vec::Zero(nz);
  qp.A_in = rows.G;
  qp.b_in = rows.bound - rows.h - margin;
  return qp;
}

RmpcSolution solve_rmpc(const AffineModel& model, const Mat& K, const Vec& x_k,
                        double M_f_k, const Vec& u_prev,
                        const std::vector<Vec>& d_preview, const RmpcConfig& cfg) {
  if (static_cast<int>(d_preview.size()) != cfg.N_p) {
    throw DimensionMismatch("solve_rmpc: preview length must equal N_p");
  }
  const PredictionMaps pm = build_prediction(model, K, x_k, M_f_k, u_prev, d_preview);
  const QuadraticProgram qp = tighten_constraints(pm, cfg);
  const QpSolution qs = solve_qp(qp, cfg.qp);

  RmpcSolution sol;
  sol.status = qs.status;
  sol.feasible = qs.status == QpStatus::Optimal;
  sol.max_violation = qs.max_violation;
  sol.C = Eigen::Map<const Mat>(qs.z.data(), pm.m, pm.N_p);
  sol.first_move = sol.C.col(0);
  sol.objective = sol.feasible ? qs.objective : kInf;
  return sol;
}

Vec worst_case_oracle(const PredictionMaps& maps, const RmpcConfig& cfg,
                      const Vec& C) {
  const int dims = maps.q * maps.N_p;
  if (dims > 18) {
    throw TooLarge("worst_case_oracle: " + std::to_string(dims) +
                   " disturbance coordinates exceed the enumeration limit of 18");
  }
  const ConstraintRows rows = constraint_rows(maps, cfg);
  const Vec nominal = rows.G * C + rows.h - rows.bound;
  const Vec lo = cfg.w_box.lower.replicate(maps.N_p, 1);
  const Vec hi = cfg.w_box.upper.replicate(maps.N_p, 1);
  Vec worst = Vec::Constant(rows.size(), -kInf);
  Vec W(dims);
  for (std::uint32_t mask = 0; mask < (1u << dims); ++mask) {
    for (int b = 0; b < dims; ++b) W(b) = (mask >> b) & 1u ? hi(b) : lo(b);
    worst = worst.cwiseMax(nominal + rows.E * W);
  }
  return worst;
}

}  // namespace ccd
