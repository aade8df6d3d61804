#include "ccd/qp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ccd {

const char* to_string(QpStatus status) {
  switch (status) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::Infeasible: return "infeasible";
    case QpStatus::MaxIter: return "max_iter";
  }
  return "unknown";
}

namespace {

constexpr double kViolationTol = 1e-10;  // on unit-norm rows
constexpr double kDependenceTol = 1e-14;

struct DualResult {
  Vec z;
  Vec lambda;
  QpStatus status;
  int iterations;
};

// Goldfarb-Idnani dual active-set iteration on rows already scaled to unit
// norm. Starts from the unconstrained minimizer and adds the most violated
// constraint until none is violated, dropping rows whose multipliers hit zero.
DualResult dual_active_set(const Eigen::LLT<Mat>& chol, const Vec& g,
                           const Mat& A, const Vec& b, int max_iter) {
  const Eigen::Index n = g.size();
  const Eigen::Index m = A.rows();
  const auto L = chol.matrixL();
  const auto Lt = chol.matrixU();

  Vec z = -chol.solve(g);
  Vec lambda = Vec::Zero(m);
  std::vector<int> active;
  std::vector<char> is_active(static_cast<std::size_t>(m), 0);

  int iter = 0;
  while (true) {
    int p = -1;
    double worst = kViolationTol;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (is_active[static_cast<std::size_t>(i)]) continue;
      const double s = A.row(i).dot(z) - b(i);
      if (s > worst) {
        worst = s;
        p = static_cast<int>(i);
      }
    }
    if (p < 0) return {z, lambda, QpStatus::Optimal, iter};

    const Vec a_t = L.solve(A.row(p).transpose());
    while (true) {
      if (++iter > max_iter) return {z, lambda, QpStatus::MaxIter, iter};

      const Eigen::Index q = static_cast<Eigen::Index>(active.size());
      Vec r = Vec::Zero(q);
      Vec v = a_t;
      if (q > 0) {
        Mat N_t(n, q);
        for (Eigen::Index j = 0; j < q; ++j) {
          N_t.col(j) = A.row(active[static_cast<std::size_t>(j)]).transpose();
        }
        N_t = L.solve(N_t);
        r = N_t.colPivHouseholderQr().solve(a_t);
        v = a_t - N_t * r;
      }

      double t2 = kInf;
      int block = -1;
      for (Eigen::Index j = 0; j < q; ++j) {
        if (r(j) > 1e-14) {
          const double ratio = lambda(active[static_cast<std::size_t>(j)]) / r(j);
          if (ratio < t2) {
            t2 = ratio;
            block = static_cast<int>(j);
          }
        }
      }

      const double vv = v.squaredNorm();
      const double s_p = A.row(p).dot(z) - b(p);
      const bool dependent = vv <= kDependenceTol * std::max(1.0, a_t.squaredNorm());
      const double t1 = dependent ? kInf : std::max(s_p, 0.0) / vv;

      if (dependent && block < 0) {
        return {z, lambda, QpStatus::Infeasible, iter};
      }
      const double t = std::min(t1, t2);
      if (!dependent) z -= t * Lt.solve(v);
      for (Eigen::Index j = 0; j < q; ++j) {
        const int idx = active[static_cast<std::size_t>(j)];
        lambda(idx) = std::max(0.0, lambda(idx) - t * r(j));
      }
      lambda(p) += t;

      if (t1 <= t2) {
        active.push_back(p);
        is_active[static_cast<std::size_t>(p)] = 1;
        break;
      }
      const int dropped = active[static_cast<std::size_t>(block)];
      lambda(dropped) = 0.0;
      is_active[static_cast<std::size_t>(dropped)] = 0;
      active.erase(active.begin() + block);
    }
  }
}

struct ScaledRows {
  Mat A;
  Vec b;
  Vec norms;
  double zero_row_violation = 0.0;
};

ScaledRows scale_rows(const Mat& A, const Vec& b) {
  ScaledRows s{A, b, Vec::Ones(A.rows())};
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const double nrm = A.row(i).norm();
    if (nrm == 0.0) {
      // 0 <= b_i: either vacuous or unsatisfiable by any z.
      s.zero_row_violation = std::max(s.zero_row_violation, -b(i));
      s.A.row(i).setZero();
      s.b(i) = std::max(b(i), 0.0);
      s.norms(i) = 0.0;
      continue;
    }
    s.A.row(i) /= nrm;
    s.b(i) /= nrm;
    s.norms(i) = nrm;
  }
  return s;
}

Eigen::LLT<Mat> factor_hessian(const Mat& H) {
  Mat Hs = 0.5 * (H + H.transpose());
  const double min_eig = Hs.rows() > 0
                             ? Eigen::SelfAdjointEigenSolver<Mat>(Hs, Eigen::EigenvaluesOnly)
                                   .eigenvalues()
                                   .minCoeff()
                             : 1.0;
  if (min_eig < 1e-10) Hs.diagonal().array() += 1e-10;
  return Eigen::LLT<Mat>(Hs);
}

QpSolution finish(const QuadraticProgram& qp, const DualResult& res,
                  const Vec& norms) {
  QpSolution sol;
  sol.z = res.z;
  sol.lambda = Vec::Zero(qp.constraints());
  for (Eigen::Index i = 0; i < sol.lambda.size(); ++i) {
    if (norms(i) > 0.0) sol.lambda(i) = res.lambda(i) / norms(i);
  }
  sol.objective = 0.5 * res.z.dot(qp.H * res.z) + qp.g.dot(res.z);
  sol.max_violation =
      qp.constraints() > 0 ? std::max(0.0, (qp.A_in * res.z - qp.b_in).maxCoeff()) : 0.0;
  sol.status = res.status;
  sol.iterations = res.iterations;
  return sol;
}

void check_dims(const QuadraticProgram& qp) {
  const auto n = qp.H.rows();
  if (qp.H.cols() != n || qp.g.size() != n || qp.A_in.cols() != n ||
      qp.A_in.rows() != qp.b_in.size()) {
    throw DimensionMismatch("solve_qp: inconsistent dimensions");
  }
}

}  // namespace

Phase1Result phase1_feasibility(const Mat& A_in, const Vec& b_in, double feas_tol) {
  const Eigen::Index n = A_in.cols();
  const Eigen::Index m = A_in.rows();
  Phase1Result out;
  out.z = Vec::Zero(n);
  if (m == 0) return out;

  // Variables y = [z; t]. The LP is solved by proximal-point iterations,
  // each a strictly convex QP; for LPs these terminate after finitely many
  // steps at an exact minimizer.
  Mat A(m + 1, n + 1);
  A.topLeftCorner(m, n) = A_in;
  A.topRightCorner(m, 1).setConstant(-1.0);
  A.bottomRows(1).setZero();
  A(m, n) = -1.0;
  Vec b(m + 1);
  b << b_in, 0.0;
  const ScaledRows s = scale_rows(A, b);

  constexpr double mu = 1e-6;
  const Eigen::LLT<Mat> chol(Mat::Identity(n + 1, n + 1) * mu);
  Vec y = Vec::Zero(n + 1);
  y(n) = std::max(0.0, (-b_in).maxCoeff());
  for (int it = 0; it < 50; ++it) {
    Vec g = -mu * y;
    g(n) += 1.0;
    const DualResult r = dual_active_set(chol, g, s.A, s.b, 10 * static_cast<int>(m + n) + 100);
    if (r.status != QpStatus::Optimal) break;
    const double step = (r.z - y).cwiseAbs().maxCoeff();
    y = r.z;
    if (step <= 1e-12 * (1.0 + y.cwiseAbs().maxCoeff())) break;
  }
  out.z = y.head(n);
  out.max_slack = std::max(0.0, (A_in * out.z - b_in).maxCoeff());
  out.feasible = out.max_slack <= feas_tol;
  return out;
}

QpSolution solve_qp(const QuadraticProgram& qp, const QpOptions& options) {
  check_dims(qp);
  const ScaledRows s = scale_rows(qp.A_in, qp.b_in);
  const Eigen::LLT<Mat> chol = factor_hessian(qp.H);

  DualResult res = dual_active_set(chol, qp.g, s.A, s.b, options.max_iter);
  QpSolution sol = finish(qp, res, s.norms);
  if (sol.status == QpStatus::Optimal && sol.max_violation <= options.feas_tol) {
    return sol;
  }
  if (sol.status == QpStatus::MaxIter) return sol;

  const Phase1Result ph1 = phase1_feasibility(qp.A_in, qp.b_in, options.feas_tol);
  if (!ph1.feasible) {
    QpSolution bad;
    bad.z = ph1.z;
    bad.lambda = Vec::Zero(qp.constraints());
    bad.objective = 0.5 * ph1.z.dot(qp.H * ph1.z) + qp.g.dot(ph1.z);
    bad.status = QpStatus::Infeasible;
    bad.max_violation = ph1.max_slack;
    bad.iterations = sol.iterations;
    return bad;
  }
  // Feasible only up to the tolerance: solve on the minimally relaxed set.
  const Vec relaxed = qp.b_in.array() + (ph1.max_slack + 1e-12);
  const ScaledRows sr = scale_rows(qp.A_in, relaxed);
  res = dual_active_set(chol, qp.g, sr.A, sr.b, options.max_iter);
  QpSolution rel = finish(qp, res, sr.norms);
  rel.iterations += sol.iterations;
  if (rel.status == QpStatus::Optimal && rel.max_violation > options.feas_tol) {
    rel.status = QpStatus::Infeasible;
  }
  return rel;
}

}  // namespace ccd
