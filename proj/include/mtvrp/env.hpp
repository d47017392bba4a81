#pragma once

#include <cstdint>
#include <vector>

#include "mtvrp/instance.hpp"
#include "mtvrp/mat.hpp"

namespace mtvrp {

// One decoding trajectory. All quantities are per current sub-route unless
// noted. Time and loads reset to zero on every depot visit.
struct TrajState {
  int position = 0;
  int start_depot = 0;           // origin of the current sub-route
  double delivered = 0;          // linehaul demand served this sub-route
  double collected = 0;          // backhaul demand picked up this sub-route
  double time = 0;               // elapsed since leaving the depot
  double subroute_dist = 0;
  double total_dist = 0;         // objective accumulator (whole trajectory)
  int served_in_subroute = 0;
  int visited_count = 0;
  bool done = false;             // all customers served (terminal leg applied)
  bool stuck = false;            // no feasible continuation existed
  std::vector<uint8_t> visited;  // per customer
};

struct EnvState {
  const Instance* ins = nullptr;
  int n_traj = 0;
  int step_count = 0;
  std::vector<TrajState> traj;

  bool all_terminal() const {
    for (const auto& t : traj)
      if (!t.done && !t.stuck) return false;
    return true;
  }
};

// Multi-start reset: trajectory i is committed to visit customer i first
// (apply it through step() before querying the policy). Under multi-depot,
// start depots are assigned round-robin. Requires 1 <= n_traj <= n.
EnvState reset(const Instance& ins, int n_traj);

// Row t is the 0/1 feasibility over nodes for trajectory t. Depot columns
// open up once the current sub-route has served a customer; selecting any
// depot ends the sub-route (returning to its origin when routes are closed)
// and makes the selected depot the next origin. Terminal or stuck
// trajectories get a single-entry row at their current origin (the padding
// action). If no customer is feasible from a fresh depot, only that depot is
// unmasked; callers should then mark the trajectory stuck.
Mat<uint8_t> feasible_mask(const EnvState& s);

// Feasibility of a single action, same rules as feasible_mask.
bool action_feasible(const EnvState& s, int t, int action);

// Applies one action per trajectory. Throws std::logic_error if an action is
// masked. Padding (the origin depot) is the only legal action for done or
// stuck trajectories and leaves them unchanged.
void step(EnvState& s, const std::vector<int>& actions);

void mark_stuck(EnvState& s, int t);

// Total route length implied by a node sequence, recomputed from scratch.
// The sequence starts with the origin depot; a depot entry ends the current
// sub-route (costing the return to that sub-route's origin when routes are
// closed) and names the next origin. A trailing return for closed routes is
// added if the sequence ends on a customer. Reward is the negated length.
double finalize_reward(const Instance& ins, const std::vector<int>& sequence);

}  // namespace mtvrp
