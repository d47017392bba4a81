#pragma once

#include <algorithm>
#include <chrono>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtvrp/policy.hpp"
#include "mtvrp/validate.hpp"

namespace mtvrp {

struct InstanceScore {
  double obj = 0;
  double ref = 0;
  double gap_pct = 0;
};

struct GapReport {
  std::vector<InstanceScore> rows;
  double mean_obj = 0;
  double mean_ref = 0;
  double mean_gap_pct = 0;  // mean of per-instance gaps, not a ratio of means
  double wall_seconds = 0;  // decode loop only
  std::string csv() const;
  std::string summary() const;
};

// Best objective over n_traj uniform-random feasible trajectories, run under
// the same multi-start protocol as the model. Useful as a gap reference.
double random_policy_objective(const Instance& ins, int n_traj, Rng& rng);

// Expected objective of the policy that picks uniformly among feasible
// actions, estimated as the mean of k independent single rollouts. The first
// action is free, not forced, since a plain random policy has no start
// protocol.
double random_policy_mean_objective(const Instance& ins, int k, Rng& rng);

// Greedy multi-start decode of every instance, scored best-of-trajectories
// against the given references. Every scored solution must pass the
// validator; a violation aborts the whole report.
template <class T>
GapReport evaluate(ad::ParamStore<T>& params, const ModelConfig& model,
                   const std::vector<Instance>& instances, const std::vector<double>& refs,
                   double p_test, uint64_t seed, int n_traj = 0) {
  if (instances.size() != refs.size())
    throw std::invalid_argument("evaluate: need one reference objective per instance");
  GapReport rep;
  rep.rows.reserve(instances.size());
  for (size_t i = 0; i < instances.size(); ++i) {
    const Instance& ins = instances[i];
    const int t = n_traj > 0 ? std::min(n_traj, ins.n) : ins.n;
    ad::Tape<T> tape(&params, false);
    Rng rng(seed + i);
    RolloutOptions<T> opt;
    opt.greedy = true;
    opt.p_test = p_test;
    const auto t0 = std::chrono::steady_clock::now();
    auto r = rollout(tape, params, model, ins, t, rng, opt);
    rep.wall_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    double best = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < r.rewards.size(); ++k) {
      if (!r.complete[k]) continue;
      auto v = validate_solution(ins, r.sequences[k]);
      if (!v.ok) throw std::runtime_error("decoded solution failed validation: " + v.str());
      best = std::min(best, -r.rewards[k]);
    }
    if (!std::isfinite(best))
      throw std::runtime_error("no complete trajectory decoded for an instance");
    InstanceScore row;
    row.obj = best;
    row.ref = refs[i];
    row.gap_pct = (best - refs[i]) / refs[i] * 100.0;
    rep.rows.push_back(row);
    rep.mean_obj += row.obj;
    rep.mean_ref += row.ref;
    rep.mean_gap_pct += row.gap_pct;
  }
  const double n = static_cast<double>(rep.rows.size());
  if (n > 0) {
    rep.mean_obj /= n;
    rep.mean_ref /= n;
    rep.mean_gap_pct /= n;
  }
  return rep;
}

struct SweepRow {
  double p_ts = 0;
  double mean_gap_pct = 0;
  double wall_seconds = 0;
};

// One evaluate run per grid point over shared instances and seed.
template <class T>
std::vector<SweepRow> sweep_p_test(ad::ParamStore<T>& params, const ModelConfig& model,
                                   const std::vector<Instance>& instances,
                                   const std::vector<double>& refs,
                                   const std::vector<double>& grid, uint64_t seed,
                                   int n_traj = 0) {
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (double p : grid) {
    if (p < 0 || p > 1) throw std::invalid_argument("sweep: grid values must be in [0,1]");
    GapReport rep = evaluate(params, model, instances, refs, p, seed, n_traj);
    rows.push_back({p, rep.mean_gap_pct, rep.wall_seconds});
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace mtvrp
