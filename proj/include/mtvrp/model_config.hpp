#pragma once

namespace mtvrp {

struct ModelConfig {
  int dim = 128;
  int heads = 8;
  int hidden = 512;
  int layers = 6;
  bool single_branch = false;  // drop the sparse encoder branch
  int sparse_topk = 0;         // 0: ceil(n_customers / 2)
  double logit_clip = 10.0;    // tanh clamp on decoder scores

  // Absent-constraint sentinels (1e6) would drown real signal in the float
  // features, so time- and length-typed features saturate here. Real values
  // stay far below this cap (generated windows end before 6.3).
  double feature_time_cap = 10.0;
};

}  // namespace mtvrp
