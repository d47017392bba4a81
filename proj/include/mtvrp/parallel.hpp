#pragma once

namespace mtvrp::parallel {

// Number of OpenMP threads parallel regions will use.
int max_threads();
void set_threads(int n);

}  // namespace mtvrp::parallel
