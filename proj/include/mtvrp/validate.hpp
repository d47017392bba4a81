#pragma once

#include <string>
#include <vector>

#include "mtvrp/instance.hpp"

namespace mtvrp {

struct Violation {
  std::string rule;
  int index = -1;  // position in the sequence, -1 when not tied to one
};

struct ValidationReport {
  bool ok = true;
  std::vector<Violation> violations;
  std::string str() const;
};

// Replays a node sequence against the variant's rules from scratch: every
// customer exactly once, capacity per sub-route (pooled under mixed
// backhaul), deliveries before pickups under strict backhaul, time windows
// with waiting, per-route duration limits, depot horizon on closed routes,
// and no empty sub-routes. Sequence convention matches finalize_reward.
ValidationReport validate_solution(const Instance& ins, const std::vector<int>& sequence);

}  // namespace mtvrp
