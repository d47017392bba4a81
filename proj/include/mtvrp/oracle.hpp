#pragma once

#include <vector>

#include "mtvrp/env.hpp"

namespace mtvrp {

struct OracleResult {
  double length = 0;
  std::vector<int> sequence;  // origin depot first, then visits
  long expanded = 0;          // search nodes, for tests and tuning
};

// Exact solver by depth-first branch and bound over the same action space the
// environment exposes. Intended for reference values on small instances;
// refuses n > 10.
OracleResult solve_exact(const Instance& ins);

}  // namespace mtvrp
