#include "ccd/rccd.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

namespace ccd {

Vec DesignBounds::to_unit(const Vec& v) const {
  Vec s(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double w = box.upper(i) - box.lower(i);
    s(i) = w > 0.0 ? std::clamp((v(i) - box.lower(i)) / w, 0.0, 1.0) : 0.0;
  }
  return s;
}

Vec DesignBounds::from_unit(const Vec& s) const {
  return box.lower + s.cwiseProduct(box.upper - box.lower);
}

namespace {

struct Candidate {
  Vec s;
  Vec dir;
  RolloutResult result;
  bool evaluated = false;
};

int progress(const RolloutResult& r, int n_t) {
  return r.feasible ? n_t + 1 : r.first_infeasible_k.value_or(0);
}

void evaluate_batch(std::vector<Candidate*>& batch, const DesignBounds& bounds,
                    const ProblemSetup& setup, int threads) {
  auto run = [&](Candidate* c) {
    const DesignVector dv = DesignVector::from_vec(bounds.from_unit(c->s), setup.c_p);
    c->result = inner_rollout(dv, setup);
    c->evaluated = true;
  };
  if (threads <= 1 || batch.size() <= 1) {
    for (Candidate* c : batch) run(c);
    return;
  }
  // Each worker takes a fixed stride of the batch; results land in their
  // own slots so the merge below does not depend on scheduling.
  std::vector<std::thread> pool;
  const std::size_t nth = std::min<std::size_t>(static_cast<std::size_t>(threads), batch.size());
  for (std::size_t t = 0; t < nth; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < batch.size(); i += nth) run(batch[i]);
    });
  }
  for (auto& th : pool) th.join();
}

class DirectionSource {
 public:
  DirectionSource(std::uint64_t seed, std::vector<int> free, int dim)
      : rng_(seed), free_(std::move(free)), dim_(dim) {}

  std::vector<Vec> poll_directions(bool random) {
    std::vector<Vec> dirs;
    for (int i : free_) {
      Vec d = Vec::Zero(dim_);
      d(i) = -1.0;
      dirs.push_back(d);
      d(i) = 1.0;
      dirs.push_back(d);
    }
    if (random && free_.size() > 1) {
      // Householder reflection of a random direction: an orthonormal basis
      // over the free coordinates, polled with both signs.
      Vec v = Vec::Zero(dim_);
      for (int i : free_) v(i) = gaussian();
      v.normalize();
      for (int i : free_) {
        Vec col = -2.0 * v(i) * v;
        col(i) += 1.0;
        col /= col.cwiseAbs().maxCoeff();
        dirs.push_back(col);
        dirs.push_back(-col);
      }
    }
    return dirs;
  }

 private:
  double unit() { return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53; }
  double gaussian() {
    return std::sqrt(-2.0 * std::log(unit())) * std::cos(2.0 * M_PI * unit());
  }

  std::mt19937_64 rng_;
  std::vector<int> free_;
  int dim_;
};

}  // namespace

DesignResult outer_optimize(const DesignVector& initial, const DesignBounds& bounds,
                            const ProblemSetup& setup,
                            const PatternSearchOptions& options) {
  const int dim = DesignVector::kSize;
  const int n_t = setup.steps();
  if (!bounds.box.contains(initial.to_vec(), 1e-12)) {
    throw CcdError("outer_optimize: initial design lies outside its bounds");
  }
  std::vector<int> free;
  for (int i = 0; i < dim; ++i) {
    if (bounds.box.upper(i) > bounds.box.lower(i)) free.push_back(i);
  }
  DirectionSource source(options.seed, free, dim);

  auto design_of = [&](const Vec& s) {
    return DesignVector::from_vec(bounds.from_unit(s), setup.c_p);
  };

  SearchTrace trace;
  Candidate best;
  best.s = bounds.to_unit(initial.to_vec());
  best.result = inner_rollout(design_of(best.s), setup);
  trace.evaluations = 1;
  if (best.result.feasible) trace.accepted.push_back(best.result.J_sys);

  double mesh = options.mesh_init;
  Vec last_success;
  while (mesh >= options.mesh_min && trace.evaluations < options.max_evals &&
         !free.empty()) {
    ++trace.iterations;
    std::vector<Vec> dirs;
    if (last_success.size()) dirs.push_back(last_success);
    for (Vec& d : source.poll_directions(options.random_directions)) dirs.push_back(std::move(d));

    const bool have_feasible = best.result.feasible;
    const double f_best = best.result.J_sys;
    std::vector<Candidate> cands;
    for (const Vec& d : dirs) {
      Vec s = (best.s + mesh * d).cwiseMax(0.0).cwiseMin(1.0);
      if ((s - best.s).cwiseAbs().maxCoeff() < 1e-15) continue;
      // J is known in closed form; a point that cannot improve it by obj_tol
      // never needs a rollout once a feasible incumbent exists.
      if (have_feasible && objective(design_of(s), setup.c_p) > f_best - options.obj_tol) {
        continue;
      }
      cands.push_back({std::move(s), d, {}, false});
    }

    bool success = false;
    const std::size_t batch_size = static_cast<std::size_t>(std::max(1, options.poll_batch));
    for (std::size_t start = 0; start < cands.size() && !success; start += batch_size) {
      std::vector<Candidate*> batch;
      for (std::size_t i = start; i < std::min(cands.size(), start + batch_size); ++i) {
        if (trace.evaluations >= options.max_evals) break;
        batch.push_back(&cands[i]);
        ++trace.evaluations;
      }
      if (batch.empty()) break;
      evaluate_batch(batch, bounds, setup, options.threads);

      // Deterministic merge: best objective, ties to the lowest poll index.
      Candidate* winner = nullptr;
      for (Candidate* c : batch) {
        const RolloutResult& r = c->result;
        if (have_feasible) {
          if (!r.feasible || r.J_sys > f_best - options.obj_tol) continue;
          if (!winner || r.J_sys < winner->result.J_sys) winner = c;
        } else {
          const int pr = progress(r, n_t);
          if (pr <= progress(best.result, n_t)) continue;
          if (!winner || pr > progress(winner->result, n_t) ||
              (r.feasible && winner->result.feasible && r.J_sys < winner->result.J_sys)) {
            winner = c;
          }
        }
      }
      if (winner) {
        success = true;
        last_success = winner->dir;
        best = std::move(*winner);
        if (best.result.feasible) trace.accepted.push_back(best.result.J_sys);
      }
    }
    if (success) {
      mesh = std::min(2.0 * mesh, options.mesh_max);
    } else {
      mesh *= 0.5;
      last_success.resize(0);
    }
  }
  trace.final_mesh = mesh;

  if (!best.result.feasible) {
    throw NoFeasiblePoint("outer search found no feasible design in " +
                          std::to_string(trace.evaluations) + " rollouts (best run reached step " +
                          std::to_string(best.result.first_infeasible_k.value_or(0)) + ": " +
                          best.result.diagnostic + ")",
                          best.result.first_infeasible_k);
  }
  DesignResult out;
  out.algorithm = "rccd";
  out.design = design_of(best.s);
  out.J_sys = best.result.J_sys;
  out.rollout = std::move(best.result);
  out.trace = std::move(trace);
  return out;
}

}  // namespace ccd
