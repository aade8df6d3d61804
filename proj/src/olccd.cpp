#include "ccd/olccd.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>

namespace ccd {

Vec TranscriptionVector::to_vec() const {
  Vec v(size());
  v.head(9) << p.C_c, p.C_h, p.T_f, p.R_s, x0.M_f, x0.M_r, x0.T_h, x0.T_c, x0.T_r;
  for (std::size_t k = 0; k < U.size(); ++k) {
    v(9 + 2 * static_cast<Eigen::Index>(k)) = U[k].mdot_f;
    v(10 + 2 * static_cast<Eigen::Index>(k)) = U[k].mdot_r;
  }
  return v;
}

TranscriptionVector TranscriptionVector::from_vec(const Vec& v, double c_p) {
  if (v.size() < 9 || (v.size() - 9) % 2 != 0) {
    throw DimensionMismatch("TranscriptionVector: expected 9 + 2 n_t entries");
  }
  TranscriptionVector tv;
  tv.p = {v(0), v(1), v(2), v(3), c_p};
  tv.x0 = {v(4), v(5), v(6), v(7), v(8)};
  const Eigen::Index n = (v.size() - 9) / 2;
  tv.U.resize(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    tv.U[static_cast<std::size_t>(k)] = {v(9 + 2 * k), v(10 + 2 * k)};
  }
  return tv;
}

OlAudit audit_transcription(const TranscriptionVector& tv, const ProblemSetup& setup) {
  OlAudit a;
  const RmpcConfig& cfg = setup.rmpc;
  for (std::size_t k = 0; k < tv.U.size(); ++k) {
    const Vec u = tv.U[k].vec();
    a.input = std::max(a.input, cfg.u_box.excess(u));
    if (k > 0) {
      const Vec du = (u - tv.U[k - 1].vec()).cwiseAbs() - cfg.rate_limit;
      a.rate = std::max(a.rate, du.maxCoeff());
    }
  }
  try {
    SimState x = tv.x0;
    for (int k = 1; k <= setup.steps(); ++k) {
      x = simulate_interval(x, tv.U[static_cast<std::size_t>(k - 1)], setup.profile.at(k),
                            tv.p, setup.tau_s(), setup.n_sub);
      a.state = std::max(a.state, setup.state_box.excess(x.vec()));
    }
  } catch (const CcdError&) {
    a.state = kInf;
  }
  return a;
}

namespace {

struct StateRow {
  int state;
  bool upper;
  double bound;  // already backed off
};

/// Scaled transcription problem: every variable lives in [0, 1].
class OlProblem {
 public:
  OlProblem(const BoxSet& design_box, const ProblemSetup& setup, double backoff)
      : setup_(setup), n_(setup.steps()) {
    const int N = 9 + 2 * n_;
    lower_.resize(N);
    width_.resize(N);
    lower_.head(9) = design_box.lower;
    width_.head(9) = design_box.upper - design_box.lower;
    for (int k = 0; k < n_; ++k) {
      lower_.segment(9 + 2 * k, 2) = setup.rmpc.u_box.lower;
      width_.segment(9 + 2 * k, 2) = setup.rmpc.u_box.upper - setup.rmpc.u_box.lower;
    }
    for (int s = 0; s < kStates; ++s) {
      if (std::isfinite(setup.state_box.upper(s))) {
        rows_.push_back({s, true, setup.state_box.upper(s) - backoff});
      }
      if (std::isfinite(setup.state_box.lower(s))) {
        rows_.push_back({s, false, setup.state_box.lower(s) + backoff});
      }
    }
    for (int c = 0; c < kInputs; ++c) {
      if (std::isfinite(setup.rmpc.rate_limit(c))) rate_inputs_.push_back(c);
    }
  }

  int size() const { return static_cast<int>(lower_.size()); }
  int steps() const { return n_; }

  Vec unscale(const Vec& y) const { return lower_ + y.cwiseProduct(width_); }
  Vec scale(const Vec& v) const {
    Vec y(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      y(i) = width_(i) > 0.0 ? std::clamp((v(i) - lower_(i)) / width_(i), 0.0, 1.0) : 0.0;
    }
    return y;
  }
  TranscriptionVector decode(const Vec& y) const {
    return TranscriptionVector::from_vec(unscale(y), setup_.c_p);
  }

  int state_rows_per_step() const { return static_cast<int>(rows_.size()); }
  int constraint_count() const {
    return n_ * state_rows_per_step() +
           2 * std::max(0, n_ - 1) * static_cast<int>(rate_inputs_.size());
  }

  /// Full evaluation: objective, constraint vector, and the trajectory used
  /// for suffix re-simulation during differencing.
  struct Eval {
    double f = kInf;
    Vec g;
    std::vector<SimState> traj;  // x_1..x_{n+1}
  };

  std::optional<Eval> evaluate(const Vec& y) const {
    const TranscriptionVector tv = decode(y);
    Eval e;
    e.f = objective(tv.p, tv.x0);
    e.g.resize(constraint_count());
    e.traj.reserve(static_cast<std::size_t>(n_ + 1));
    e.traj.push_back(tv.x0);
    try {
      SimState x = tv.x0;
      for (int k = 1; k <= n_; ++k) {
        x = step(x, tv, k);
        e.traj.push_back(x);
        fill_state_rows(x, k, e.g);
      }
    } catch (const CcdError&) {
      return std::nullopt;
    }
    fill_rate_rows(tv, e.g);
    return e;
  }

  /// Penalty terms of the augmented Lagrangian for inequality rows g <= 0.
  static double penalty(const Vec& g, const Vec& lambda, double rho, int begin, int end) {
    double sum = 0.0;
    for (int i = begin; i < end; ++i) {
      const double shifted = std::max(0.0, g(i) + lambda(i) / rho);
      const double l = lambda(i) / rho;
      sum += 0.5 * rho * (shifted * shifted - l * l);
    }
    return sum;
  }

  double merit(const Eval& e, const Vec& lambda, double rho) const {
    return e.f + penalty(e.g, lambda, rho, 0, static_cast<int>(e.g.size()));
  }

  /// Merit with input u_k (1-based) replaced; states before step k reuse
  /// the cached trajectory. Returns nullopt if the plant leaves its domain.
  std::optional<double> merit_with_input(const Eval& base, const Vec& y, int k,
                                         const Vec& lambda, double rho) const {
    const TranscriptionVector tv = decode(y);
    Vec g = base.g;
    try {
      SimState x = base.traj[static_cast<std::size_t>(k - 1)];
      for (int j = k; j <= n_; ++j) {
        x = step(x, tv, j);
        fill_state_rows(x, j, g);
      }
    } catch (const CcdError&) {
      return std::nullopt;
    }
    fill_rate_rows(tv, g);
    return base.f + penalty(g, lambda, rho, 0, static_cast<int>(g.size()));
  }

 private:
  SimState step(const SimState& x, const TranscriptionVector& tv, int k) const {
    return simulate_interval(x, tv.U[static_cast<std::size_t>(k - 1)], setup_.profile.at(k),
                             tv.p, setup_.tau_s(), setup_.n_sub);
  }

  void fill_state_rows(const SimState& x, int k, Vec& g) const {
    const StateVec v = x.vec();
    const int base = (k - 1) * state_rows_per_step();
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const StateRow& row = rows_[r];
      g(base + static_cast<int>(r)) =
          row.upper ? v(row.state) - row.bound : row.bound - v(row.state);
    }
  }

  void fill_rate_rows(const TranscriptionVector& tv, Vec& g) const {
    int idx = n_ * state_rows_per_step();
    for (int k = 1; k < n_; ++k) {
      const Vec du = tv.U[static_cast<std::size_t>(k)].vec() -
                     tv.U[static_cast<std::size_t>(k - 1)].vec();
      for (int c : rate_inputs_) {
        const double lim = setup_.rmpc.rate_limit(c);
        g(idx++) = (du(c) - lim) / lim;
        g(idx++) = (-du(c) - lim) / lim;
      }
    }
  }

  const ProblemSetup& setup_;
  int n_;
  Vec lower_;
  Vec width_;
  std::vector<StateRow> rows_;
  std::vector<int> rate_inputs_;
};

double violation(const Vec& g) {
  return g.size() ? std::max(0.0, g.maxCoeff()) : 0.0;
}

struct InnerResult {
  Vec y;
  OlProblem::Eval eval;
  int iterations = 0;
};

class AugLagSolver {
 public:
  AugLagSolver(const OlProblem& prob, const AugLagOptions& opt) : prob_(prob), opt_(opt) {}

  Vec gradient(const Vec& y, const OlProblem::Eval& base, const Vec& lambda,
               double rho) const {
    const int N = prob_.size();
    Vec grad = Vec::Zero(N);
    const double f0 = prob_.merit(base, lambda, rho);
    for (int i = 0; i < N; ++i) {
      const double h = opt_.fd_step * std::max(1.0, std::abs(y(i)));
      Vec yp = y;
      Vec ym = y;
      yp(i) += h;
      ym(i) -= h;
      std::optional<double> fp, fm;
      if (i < 9) {
        if (auto e = prob_.evaluate(yp)) fp = prob_.merit(*e, lambda, rho);
        if (auto e = prob_.evaluate(ym)) fm = prob_.merit(*e, lambda, rho);
      } else {
        const int k = (i - 9) / 2 + 1;
        fp = prob_.merit_with_input(base, yp, k, lambda, rho);
        fm = prob_.merit_with_input(base, ym, k, lambda, rho);
      }
      if (fp && fm) {
        grad(i) = (*fp - *fm) / (2.0 * h);
      } else if (fp) {
        grad(i) = (*fp - f0) / h;
      } else if (fm) {
        grad(i) = (f0 - *fm) / h;
      }
    }
    return grad;
  }

  /// Projected L-BFGS with an Armijo search along the projection arc.
  InnerResult minimize(Vec y, const Vec& lambda, double rho, double tol) const {
    auto eval = prob_.evaluate(y);
    if (!eval) throw NoFeasiblePoint("olccd: starting point leaves the plant domain",
                                     std::nullopt);
    double f = prob_.merit(*eval, lambda, rho);
    Vec g = gradient(y, *eval, lambda, rho);
    std::deque<std::pair<Vec, Vec>> pairs;
    int it = 0;
    for (; it < opt_.max_inner; ++it) {
      const Vec pg = (y - g).cwiseMax(0.0).cwiseMin(1.0) - y;
      if (pg.cwiseAbs().maxCoeff() <= tol) break;

      // Variables held at a bound by the gradient stay fixed this iteration.
      std::vector<char> fixed(static_cast<std::size_t>(y.size()), 0);
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        fixed[static_cast<std::size_t>(i)] =
            (y(i) <= 0.0 && g(i) > 0.0) || (y(i) >= 1.0 && g(i) < 0.0);
      }
      auto mask = [&fixed](Vec v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) {
          if (fixed[static_cast<std::size_t>(i)]) v(i) = 0.0;
        }
        return v;
      };
      Vec d = -two_loop(mask(g), pairs, mask);
      if (d.dot(g) >= 0.0) d = -mask(g);

      double alpha = 1.0;
      bool accepted = false;
      Vec y_new;
      std::optional<OlProblem::Eval> e_new;
      double f_new = kInf;
      for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
        y_new = (y + alpha * d).cwiseMax(0.0).cwiseMin(1.0);
        e_new = prob_.evaluate(y_new);
        if (!e_new) continue;
        f_new = prob_.merit(*e_new, lambda, rho);
        if (f_new <= f + 1e-4 * g.dot(y_new - y)) {
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      const Vec g_new = gradient(y_new, *e_new, lambda, rho);
      const Vec s = y_new - y;
      const Vec yy = g_new - g;
      if (s.dot(yy) > 1e-12 * s.norm() * yy.norm()) {
        pairs.emplace_back(s, yy);
        if (static_cast<int>(pairs.size()) > opt_.memory) pairs.pop_front();
      }
      const double decrease = f - f_new;
      y = std::move(y_new);
      eval = std::move(e_new);
      f = f_new;
      g = g_new;
      if (decrease <= 1e-14 * std::max(1.0, std::abs(f))) break;
    }
    return {y, std::move(*eval), it};
  }

 private:
  template <typename Mask>
  static Vec two_loop(const Vec& q_in, const std::deque<std::pair<Vec, Vec>>& pairs,
                      Mask mask) {
    Vec q = q_in;
    std::vector<double> alpha(pairs.size());
    for (std::size_t j = pairs.size(); j-- > 0;) {
      const Vec s = mask(pairs[j].first);
      const Vec y = mask(pairs[j].second);
      const double sy = s.dot(y);
      if (sy <= 0.0) {
        alpha[j] = 0.0;
        continue;
      }
      alpha[j] = s.dot(q) / sy;
      q -= alpha[j] * y;
    }
    if (!pairs.empty()) {
      const Vec s = mask(pairs.back().first);
      const Vec y = mask(pairs.back().second);
      const double yy = y.squaredNorm();
      if (yy > 0.0 && s.dot(y) > 0.0) q *= s.dot(y) / yy;
    }
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      const Vec s = mask(pairs[j].first);
      const Vec y = mask(pairs[j].second);
      const double sy = s.dot(y);
      if (sy <= 0.0) continue;
      const double beta = y.dot(q) / sy;
      q += (alpha[j] - beta) * s;
    }
    return mask(q);
  }

  const OlProblem& prob_;
  const AugLagOptions& opt_;
};

}  // namespace

DesignResult transcribe_and_solve(const TranscriptionVector& initial,
                                  const BoxSet& design_box, const ProblemSetup& setup,
                                  const AugLagOptions& options) {
  if (static_cast<int>(initial.U.size()) != setup.steps()) {
    throw DimensionMismatch("transcribe_and_solve: input sequence length " +
                            std::to_string(initial.U.size()) + " != profile length " +
                            std::to_string(setup.steps()));
  }
  if (design_box.dim() != 9) {
    throw DimensionMismatch("transcribe_and_solve: design box must have 9 entries");
  }
  const OlProblem prob(design_box, setup, options.backoff);
  const AugLagSolver solver(prob, options);

  Vec y = prob.scale(initial.to_vec());
  Vec lambda = Vec::Zero(prob.constraint_count());
  double rho = options.rho_init;
  double tol = options.inner_tol_init;
  double prev_violation = kInf;
  SearchTrace trace;
  for (int outer = 0; outer < options.max_outer; ++outer) {
    InnerResult inner = solver.minimize(y, lambda, rho, tol);
    y = inner.y;
    trace.iterations += inner.iterations;
    const Vec& g = inner.eval.g;
    const double viol = violation(g);
    trace.accepted.push_back(inner.eval.f);
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      lambda(i) = std::max(0.0, lambda(i) + rho * g(i));
    }
    const double audit = audit_transcription(prob.decode(y), setup).max();
    if (audit <= options.constraint_tol && tol <= options.inner_tol_min * 10.0) break;
    if (viol > 0.25 * prev_violation) rho = std::min(rho * options.rho_growth, options.rho_max);
    prev_violation = viol;
    tol = std::max(tol * 0.1, options.inner_tol_min);
  }
  trace.evaluations = trace.iterations;

  const TranscriptionVector best = prob.decode(y);
  const OlAudit audit = audit_transcription(best, setup);
  if (!(audit.max() <= options.constraint_tol)) {
    throw NoFeasiblePoint("olccd: constraint violation " + std::to_string(audit.max()) +
                              " could not be driven below " +
                              std::to_string(options.constraint_tol),
                          std::nullopt);
  }

  DesignResult out;
  out.algorithm = "olccd";
  out.design.p = best.p;
  out.design.x0 = best.x0;
  out.design.u0 = best.U.empty() ? ControlInput{} : best.U.front();
  out.J_sys = objective(best.p, best.x0);
  out.rollout = open_loop_replay(best.U, best.x0, setup.profile, best.p, setup);
  for (const auto& u : best.U) out.rollout.schedules.C_star.push_back(u.vec());
  out.trace = std::move(trace);
  out.constraint_violation = audit.max();
  return out;
}

}  // namespace ccd
