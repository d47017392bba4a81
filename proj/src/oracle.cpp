#include "mtvrp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mtvrp {

namespace {

struct Search {
  const Instance& ins;
  std::vector<double> min_incoming;  // per customer, cheapest possible entering edge
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_seq;
  std::vector<int> seq;
  long expanded = 0;
  static constexpr long kBudget = 200'000'000;

  explicit Search(const Instance& i) : ins(i) {
    min_incoming.resize(ins.n);
    for (int c = 0; c < ins.n; ++c) {
      const int node = ins.node_of_customer(c);
      double m = std::numeric_limits<double>::infinity();
      for (int other = 0; other < ins.num_nodes(); ++other)
        if (other != node) m = std::min(m, ins.dist(other, node));
      min_incoming[c] = m;
    }
  }

  double lower_bound(const EnvState& s) const {
    double lb = s.traj[0].total_dist;
    for (int c = 0; c < ins.n; ++c)
      if (!s.traj[0].visited[c]) lb += min_incoming[c];
    return lb;
  }

  void dfs(const EnvState& s) {
    if (++expanded > kBudget) throw std::runtime_error("exact solver budget exceeded");
    const TrajState& t = s.traj[0];
    if (t.done) {
      if (t.total_dist < best) {
        best = t.total_dist;
        best_seq = seq;
      }
      return;
    }

    // Children ordered by leg length so the first dive is greedy and sets a
    // tight incumbent early.
    std::vector<std::pair<double, int>> order;
    for (int a = 0; a < ins.num_nodes(); ++a) {
      if (!action_feasible(s, 0, a)) continue;
      if (ins.is_depot(a) && t.served_in_subroute == 0) continue;  // stuck fallback, not progress
      double leg;
      if (ins.is_depot(a))
        leg = ins.variant.open ? 0.0 : ins.dist(t.position, t.start_depot);
      else
        leg = ins.dist(t.position, a);
      order.emplace_back(leg, a);
    }
    std::sort(order.begin(), order.end());

    for (const auto& [leg, a] : order) {
      EnvState child = s;
      std::vector<int> act{a};
      step(child, act);
      if (lower_bound(child) >= best - 1e-12) continue;
      seq.push_back(a);
      dfs(child);
      seq.pop_back();
    }
  }
};

}  // namespace

OracleResult solve_exact(const Instance& ins) {
  if (ins.n > 10) throw std::invalid_argument("exact solver handles at most 10 customers");
  Search search(ins);
  for (int d = 0; d < ins.num_depots(); ++d) {
    EnvState s = reset(ins, 1);
    s.traj[0].start_depot = d;
    s.traj[0].position = d;
    search.seq.assign(1, d);
    search.dfs(s);
    if (!ins.variant.multi_depot) break;
  }
  if (!std::isfinite(search.best)) throw std::runtime_error("no feasible solution found");
  OracleResult r;
  r.length = search.best;
  r.sequence = search.best_seq;
  r.expanded = search.expanded;
  return r;
}

}  // namespace mtvrp
