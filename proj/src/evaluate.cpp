#include "mtvrp/evaluate.hpp"

#include <cstdio>

namespace mtvrp {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Picks uniformly among feasible actions every step until every trajectory
// terminates. Starts from whatever state the caller hands in.
void drive_uniform(EnvState& s, Rng& rng) {
  const Instance& ins = *s.ins;
  const int max_steps = 2 * ins.n + ins.num_depots();
  int steps = 0;
  while (!s.all_terminal()) {
    if (++steps > max_steps) throw std::logic_error("random rollout exceeded the step bound");
    Mat<uint8_t> mask = feasible_mask(s);
    std::vector<int> actions(s.n_traj);
    for (int i = 0; i < s.n_traj; ++i) {
      int count = 0;
      for (int a = 0; a < mask.cols; ++a) count += mask.at(i, a) ? 1 : 0;
      int pick = static_cast<int>(rng.below(static_cast<uint64_t>(count)));
      int chosen = -1;
      for (int a = 0; a < mask.cols; ++a) {
        if (!mask.at(i, a)) continue;
        if (pick-- == 0) {
          chosen = a;
          break;
        }
      }
      actions[i] = chosen;
    }
    step(s, actions);
  }
}

}  // namespace

std::string GapReport::csv() const {
  std::string out = "instance,obj,ref,gap_pct\n";
  for (size_t i = 0; i < rows.size(); ++i)
    out += std::to_string(i) + "," + fmt("%.9g", rows[i].obj) + "," + fmt("%.9g", rows[i].ref) +
           "," + fmt("%.6f", rows[i].gap_pct) + "\n";
  return out;
}

std::string GapReport::summary() const {
  std::string out;
  out += "instances:      " + std::to_string(rows.size()) + "\n";
  out += "mean objective: " + fmt("%.6f", mean_obj) + "  gap " + fmt("%.3f", mean_gap_pct) + "%\n";
  out += "reference:      " + fmt("%.6f", mean_ref) + "  gap *\n";
  out += "decode time:    " + fmt("%.3f", wall_seconds) + "s\n";
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "p_ts,mean_gap_pct,wall_seconds\n";
  for (const auto& r : rows)
    out += fmt("%.3f", r.p_ts) + "," + fmt("%.6f", r.mean_gap_pct) + "," +
           fmt("%.4f", r.wall_seconds) + "\n";
  return out;
}

double random_policy_objective(const Instance& ins, int n_traj, Rng& rng) {
  EnvState s = reset(ins, n_traj);
  {
    std::vector<int> first(n_traj);
    for (int i = 0; i < n_traj; ++i) {
      const int node = ins.node_of_customer(i);
      if (action_feasible(s, i, node)) {
        first[i] = node;
      } else {
        mark_stuck(s, i);
        first[i] = s.traj[i].start_depot;
      }
    }
    step(s, first);
  }
  drive_uniform(s, rng);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_traj; ++i)
    if (s.traj[i].done && !s.traj[i].stuck) best = std::min(best, s.traj[i].total_dist);
  if (!std::isfinite(best)) throw std::runtime_error("random policy finished no trajectory");
  return best;
}

double random_policy_mean_objective(const Instance& ins, int k, Rng& rng) {
  if (k <= 0) throw std::invalid_argument("random_policy_mean_objective: k must be positive");
  double sum = 0;
  for (int r = 0; r < k; ++r) {
    EnvState s = reset(ins, 1);
    drive_uniform(s, rng);
    if (!s.traj[0].done || s.traj[0].stuck)
      throw std::runtime_error("random policy finished no trajectory");
    sum += s.traj[0].total_dist;
  }
  return sum / k;
}

}  // namespace mtvrp
