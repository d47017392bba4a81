#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtvrp/autodiff.hpp"
#include "mtvrp/model_config.hpp"
#include "mtvrp/variant.hpp"

namespace mtvrp {

struct TrainConfig {
  std::vector<VariantSpec> variants;  // batches are homogeneous, variants cycle
  int n = 10;
  int n_traj = 0;  // 0 picks n
  int epochs = 20;
  int batch_size = 64;
  int instances_per_epoch = 2000;
  double lr = 3e-4;
  double weight_decay = 1e-6;
  std::vector<int> lr_milestones{270, 295};
  double lr_decay = 0.1;
  double clip_norm = 1.0;
  double p_train = 0.75;
  double p_test = 1.0;
  int val_instances = 128;  // held-out, greedy-scored
  uint64_t seed = 1;
  std::string out_dir;  // empty: keep everything in memory
  ModelConfig model;
  bool verbose = false;
};

struct EpochMetrics {
  int epoch;
  double loss;
  double val_obj;
  double lr;
};

struct TrainResult {
  std::vector<EpochMetrics> metrics;
  ad::ParamStore<float> params;       // final weights
  ad::ParamStore<float> best_params;  // lowest validation objective
  double best_val = 0;
  int best_epoch = 0;
  double initial_val = 0;  // untrained validation objective, for sanity checks
};

// Learning-rate schedule: base rate decayed once per milestone already passed
// (epochs are 1-based, a milestone at 270 first affects epoch 271).
double scheduled_lr(const TrainConfig& cfg, int epoch);

// Rescale gradients so their global norm is at most clip_norm. Returns the
// pre-clip norm.
double clip_gradients(ad::ParamStore<float>& params, double clip_norm);

TrainResult fit(const TrainConfig& cfg);

}  // namespace mtvrp
