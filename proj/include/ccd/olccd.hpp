#pragma once

#include "ccd/rccd.hpp"

#include <vector>

namespace ccd {

/// Decision vector of the open-loop baseline: plant core (4), initial state
/// (5) and one input per step (2 n_t).
struct TranscriptionVector {
  PlantParams p;
  SimState x0;
  std::vector<ControlInput> U;

  int size() const { return 9 + 2 * static_cast<int>(U.size()); }
  Vec to_vec() const;
  static TranscriptionVector from_vec(const Vec& v, double c_p);
};

struct AugLagOptions {
  int max_outer = 25;
  int max_inner = 150;
  double constraint_tol = 1e-4;
  double backoff = 1e-3;  // state bounds are enforced this far inside X
  double rho_init = 10.0;
  double rho_growth = 10.0;
  double rho_max = 1e8;
  double inner_tol_init = 1e-2;
  double inner_tol_min = 1e-7;
  double fd_step = 1e-6;  // central differences, relative to the scaled variable
  int memory = 8;         // quasi-Newton pairs
};

struct OlAudit {
  double state = 0.0;  // largest excess outside X (raw units)
  double input = 0.0;  // largest excess outside U
  double rate = 0.0;   // largest |u_k - u_{k-1}| beyond the rate limit
  double max() const { return std::max({state, input, rate}); }
};

/// Re-simulates a transcription vector and measures its constraint residuals.
OlAudit audit_transcription(const TranscriptionVector& tv, const ProblemSetup& setup);

/// Minimizes J_sys over (p, x0, U) with the nonlinear plant simulated inside
/// the constraints: augmented Lagrangian outer loop, projected quasi-Newton
/// inner loop on finite-difference gradients. `design_box` bounds the nine
/// plant and initial-state entries in DesignVector order; inputs are bounded
/// by setup.rmpc.u_box.
DesignResult transcribe_and_solve(const TranscriptionVector& initial,
                                  const BoxSet& design_box, const ProblemSetup& setup,
                                  const AugLagOptions& options = {});

}  // namespace ccd
