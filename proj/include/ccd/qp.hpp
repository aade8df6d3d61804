#pragma once

#include "ccd/types.hpp"

namespace ccd {

/// min 0.5 z'Hz + g'z  subject to  A_in z <= b_in.
struct QuadraticProgram {
  Mat H;
  Vec g;
  Mat A_in;
  Vec b_in;

  int variables() const { return static_cast<int>(H.rows()); }
  int constraints() const { return static_cast<int>(A_in.rows()); }
};

enum class QpStatus { Optimal, Infeasible, MaxIter };

const char* to_string(QpStatus status);

struct QpSolution {
  Vec z;
  Vec lambda;  // one multiplier per inequality row
  double objective = kInf;
  QpStatus status = QpStatus::Infeasible;
  double max_violation = kInf;
  int iterations = 0;

  bool optimal() const { return status == QpStatus::Optimal; }
};

struct QpOptions {
  double feas_tol = 1e-6;
  int max_iter = 500;
};

/// Dense dual active-set solve. If the constraints admit no point, the
/// minimum achievable max-violation decides between Optimal (within
/// feas_tol, solved on the minimally relaxed set) and Infeasible.
QpSolution solve_qp(const QuadraticProgram& qp, const QpOptions& options = {});

struct Phase1Result {
  bool feasible = true;
  double max_slack = 0.0;
  Vec z;
};

/// min t  s.t.  A_in z - t <= b_in, t >= 0.
Phase1Result phase1_feasibility(const Mat& A_in, const Vec& b_in,
                                double feas_tol = 1e-6);

}  // namespace ccd
