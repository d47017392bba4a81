#include "mtvrp/env.hpp"

#include <stdexcept>
#include <string>

namespace mtvrp {

EnvState reset(const Instance& ins, int n_traj) {
  if (n_traj < 1 || n_traj > ins.n)
    throw std::invalid_argument("reset: n_traj must be in [1, n], got " + std::to_string(n_traj));
  EnvState s;
  s.ins = &ins;
  s.n_traj = n_traj;
  s.traj.resize(n_traj);
  for (int t = 0; t < n_traj; ++t) {
    TrajState& st = s.traj[t];
    st.start_depot = ins.variant.multi_depot ? t % ins.num_depots() : 0;
    st.position = st.start_depot;
    st.visited.assign(ins.n, 0);
  }
  return s;
}

namespace {

bool customer_feasible(const Instance& ins, const TrajState& st, int c) {
  if (st.visited[c]) return false;
  const Customer& cu = ins.customers[c];
  const VariantSpec& v = ins.variant;

  if (v.mixed_backhaul) {
    if (st.delivered + st.collected + cu.dl + cu.db > ins.capacity) return false;
  } else {
    if (cu.dl > 0 && st.delivered + cu.dl > ins.capacity) return false;
    if (cu.db > 0 && st.collected + cu.db > ins.capacity) return false;
  }

  // Within a sub-route, deliveries must precede pickups.
  if (v.backhaul && !v.mixed_backhaul && cu.dl > 0 && st.collected > 0) return false;

  const double leg = ins.dist(st.position, ins.node_of_customer(c));

  if (v.time_windows) {
    const double arrival = std::max(st.time + leg, cu.te);
    if (arrival > cu.tl) return false;
    if (!v.open) {
      const double back = ins.dist(ins.node_of_customer(c), st.start_depot);
      if (arrival + cu.ts + back > ins.horizon) return false;
    }
  }

  if (v.duration_limit) {
    double need = st.subroute_dist + leg;
    if (!v.open) need += ins.dist(ins.node_of_customer(c), st.start_depot);
    if (need > ins.duration_limit) return false;
  }

  return true;
}

}  // namespace

bool action_feasible(const EnvState& s, int t, int action) {
  const Instance& ins = *s.ins;
  const TrajState& st = s.traj[t];
  if (st.done || st.stuck) return action == st.start_depot;
  if (ins.is_depot(action)) {
    if (st.served_in_subroute >= 1) return true;
    // Fresh at a depot: depot actions only as the stuck-padding fallback.
    if (action != st.start_depot) return false;
    for (int c = 0; c < ins.n; ++c)
      if (customer_feasible(ins, st, c)) return false;
    return true;
  }
  return customer_feasible(ins, st, ins.customer_of(action));
}

Mat<uint8_t> feasible_mask(const EnvState& s) {
  const Instance& ins = *s.ins;
  Mat<uint8_t> m(s.n_traj, ins.num_nodes());
  for (int t = 0; t < s.n_traj; ++t) {
    const TrajState& st = s.traj[t];
    uint8_t* row = m.row(t);
    if (st.done || st.stuck) {
      row[st.start_depot] = 1;
      continue;
    }
    bool any_customer = false;
    for (int c = 0; c < ins.n; ++c) {
      if (customer_feasible(ins, st, c)) {
        row[ins.node_of_customer(c)] = 1;
        any_customer = true;
      }
    }
    if (st.served_in_subroute >= 1) {
      for (int d = 0; d < ins.num_depots(); ++d) row[d] = 1;
    } else if (!any_customer) {
      row[st.start_depot] = 1;
    }
  }
  return m;
}

void step(EnvState& s, const std::vector<int>& actions) {
  const Instance& ins = *s.ins;
  if (static_cast<int>(actions.size()) != s.n_traj)
    throw std::invalid_argument("step: need one action per trajectory");
  for (int t = 0; t < s.n_traj; ++t) {
    const int v = actions[t];
    if (v < 0 || v >= ins.num_nodes())
      throw std::invalid_argument("step: action out of range");
    if (!action_feasible(s, t, v))
      throw std::logic_error("step: masked action " + std::to_string(v) + " for trajectory " +
                             std::to_string(t));
    TrajState& st = s.traj[t];
    if (st.done || st.stuck) continue;  // padding

    if (ins.is_depot(v)) {
      if (st.served_in_subroute == 0) {
        // Fallback depot action with nothing feasible: dead end.
        st.stuck = true;
        continue;
      }
      const double leg = ins.variant.open ? 0.0 : ins.dist(st.position, st.start_depot);
      st.total_dist += leg;
      st.position = v;
      st.start_depot = v;
      st.delivered = 0;
      st.collected = 0;
      st.time = 0;
      st.subroute_dist = 0;
      st.served_in_subroute = 0;
      continue;
    }

    const int c = ins.customer_of(v);
    const Customer& cu = ins.customers[c];
    const double leg = ins.dist(st.position, v);
    st.total_dist += leg;
    st.subroute_dist += leg;
    const double arrival = std::max(st.time + leg, cu.te);
    st.time = arrival + cu.ts;
    st.delivered += cu.dl;
    st.collected += cu.db;
    st.visited[c] = 1;
    ++st.visited_count;
    ++st.served_in_subroute;
    st.position = v;

    if (st.visited_count == ins.n) {
      if (!ins.variant.open) st.total_dist += ins.dist(v, st.start_depot);
      st.done = true;
    }
  }
  ++s.step_count;
}

void mark_stuck(EnvState& s, int t) { s.traj[t].stuck = true; }

double finalize_reward(const Instance& ins, const std::vector<int>& sequence) {
  if (sequence.empty() || !ins.is_depot(sequence[0]))
    throw std::invalid_argument("finalize_reward: sequence must start at a depot");
  double length = 0;
  int pos = sequence[0];
  int origin = sequence[0];
  for (size_t i = 1; i < sequence.size(); ++i) {
    const int v = sequence[i];
    if (ins.is_depot(v)) {
      if (!ins.variant.open) length += ins.dist(pos, origin);
      pos = v;
      origin = v;
    } else {
      length += ins.dist(pos, v);
      pos = v;
    }
  }
  if (!ins.is_depot(pos) && !ins.variant.open) length += ins.dist(pos, origin);
  return -length;
}

}  // namespace mtvrp
