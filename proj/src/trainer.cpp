#include "mtvrp/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "mtvrp/checkpoint.hpp"
#include "mtvrp/errors.hpp"
#include "mtvrp/policy.hpp"

namespace mtvrp {

namespace {

struct Adam {
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long t = 0;
  std::vector<Mat<float>> m, v;

  void init(const ad::ParamStore<float>& p) {
    m.reserve(p.entries.size());
    v.reserve(p.entries.size());
    for (const auto& e : p.entries) {
      m.emplace_back(e.value.rows, e.value.cols);
      v.emplace_back(e.value.rows, e.value.cols);
    }
  }

  // Decoupled weight decay: the decay term skips the moment estimates.
  void step(ad::ParamStore<float>& p, double lr, double weight_decay) {
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (size_t i = 0; i < p.entries.size(); ++i) {
      auto& e = p.entries[i];
      for (size_t k = 0; k < e.value.a.size(); ++k) {
        const double g = e.grad.a[k];
        const double mk = beta1 * m[i].a[k] + (1 - beta1) * g;
        const double vk = beta2 * v[i].a[k] + (1 - beta2) * g * g;
        m[i].a[k] = static_cast<float>(mk);
        v[i].a[k] = static_cast<float>(vk);
        const double update = (mk / c1) / (std::sqrt(vk / c2) + eps) +
                              weight_decay * e.value.a[k];
        e.value.a[k] = static_cast<float>(e.value.a[k] - lr * update);
      }
    }
  }
};

double validation_objective(ad::ParamStore<float>& params, const ModelConfig& model,
                            const std::vector<Instance>& val_set, int n_traj, double p_test,
                            uint64_t seed) {
  double sum = 0;
  for (size_t i = 0; i < val_set.size(); ++i) {
    ad::Tape<float> tape(&params, false);
    Rng rng(seed + i);
    RolloutOptions<float> opt;
    opt.greedy = true;
    opt.p_test = p_test;
    auto r = rollout(tape, params, model, val_set[i], n_traj, rng, opt);
    double best = std::numeric_limits<double>::infinity();
    for (size_t t = 0; t < r.rewards.size(); ++t)
      if (r.complete[t]) best = std::min(best, -r.rewards[t]);
    if (!std::isfinite(best)) throw NumericError("validation rollout produced no complete trajectory");
    sum += best;
  }
  return sum / static_cast<double>(val_set.size());
}

}  // namespace

double scheduled_lr(const TrainConfig& cfg, int epoch) {
  double lr = cfg.lr;
  for (int m : cfg.lr_milestones)
    if (m < epoch) lr *= cfg.lr_decay;
  return lr;
}

double clip_gradients(ad::ParamStore<float>& params, double clip_norm) {
  double sq = 0;
  for (const auto& e : params.entries)
    for (float g : e.grad.a) sq += static_cast<double>(g) * g;
  const double norm = std::sqrt(sq);
  if (norm > clip_norm && norm > 0) {
    const float scale = static_cast<float>(clip_norm / norm);
    for (auto& e : params.entries)
      for (float& g : e.grad.a) g *= scale;
  }
  return norm;
}

TrainResult fit(const TrainConfig& cfg) {
  if (cfg.variants.empty()) throw std::invalid_argument("fit: no variants given");
  if (cfg.batch_size < 1 || cfg.epochs < 1 || cfg.instances_per_epoch < 1)
    throw std::invalid_argument("fit: config values must be positive");

  const int n_traj = cfg.n_traj > 0 ? cfg.n_traj : cfg.n;
  if (n_traj < 2) throw std::invalid_argument("fit: need at least 2 trajectories for the shared baseline");

  TrainResult res;
  res.params = make_policy_params<float>(cfg.model, cfg.seed);
  Adam adam;
  adam.init(res.params);

  Rng master(cfg.seed ^ 0x5851f42d4c957f2dULL);
  const uint64_t val_seed = master.next_u64();
  std::vector<Instance> val_set;
  val_set.reserve(cfg.val_instances);
  VariantSpec cvrp;  // defaults: closed, capacity only
  for (int i = 0; i < cfg.val_instances; ++i)
    val_set.push_back(generate(cvrp, cfg.n, master.next_u64()));

  res.initial_val =
      validation_objective(res.params, cfg.model, val_set, n_traj, cfg.p_test, val_seed);
  res.best_val = res.initial_val;
  res.best_epoch = 0;
  res.best_params = res.params;
  if (cfg.verbose)
    std::printf("epoch %3d  val %.4f (untrained)\n", 0, res.initial_val);

  std::ofstream metrics_file;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    metrics_file.open(cfg.out_dir + "/metrics.csv");
    metrics_file << "epoch,loss,val_obj,lr\n";
  }
  auto save_best = [&] {
    if (!cfg.out_dir.empty())
      save_checkpoint(cfg.out_dir + "/best.ckpt", cfg.model, res.best_params);
  };
  save_best();  // the untrained weights are the incumbent

  const int batches = std::max(1, cfg.instances_per_epoch / cfg.batch_size);
  long batch_counter = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double lr = scheduled_lr(cfg, epoch);
    double epoch_loss = 0;
    for (int b = 0; b < batches; ++b, ++batch_counter) {
      const VariantSpec& variant = cfg.variants[batch_counter % cfg.variants.size()];
      res.params.zero_grad();
      double batch_loss = 0;
      for (int i = 0; i < cfg.batch_size; ++i) {
        Instance ins = generate(variant, cfg.n, master.next_u64());
        ad::Tape<float> tape(&res.params, true);
        Rng roll_rng(master.next_u64());
        RolloutOptions<float> opt;
        opt.greedy = false;
        opt.training_gate = true;
        opt.p_train = cfg.p_train;
        opt.p_test = cfg.p_test;
        auto r = rollout(tape, res.params, cfg.model, ins, n_traj, roll_rng, opt);
        auto loss = reinforce_loss(tape, r, r.rewards);
        batch_loss += static_cast<double>(tape.val(loss).at(0, 0));
        tape.backward(loss);
      }
      batch_loss /= cfg.batch_size;
      epoch_loss += batch_loss;
      if (!std::isfinite(batch_loss)) {
        save_best();
        throw NumericError("training loss is not finite; last best checkpoint kept");
      }
      const float inv = 1.0f / static_cast<float>(cfg.batch_size);
      for (auto& e : res.params.entries)
        for (float& g : e.grad.a) g *= inv;
      clip_gradients(res.params, cfg.clip_norm);
      adam.step(res.params, lr, cfg.weight_decay);
    }
    epoch_loss /= batches;

    const double val =
        validation_objective(res.params, cfg.model, val_set, n_traj, cfg.p_test, val_seed);
    res.metrics.push_back({epoch, epoch_loss, val, lr});
    if (metrics_file.is_open()) {
      char line[160];
      std::snprintf(line, sizeof line, "%d,%.9g,%.9g,%.9g\n", epoch, epoch_loss, val, lr);
      metrics_file << line;
    }
    if (cfg.verbose)
      std::printf("epoch %3d  loss %+.5f  val %.4f  lr %.2e\n", epoch, epoch_loss, val, lr);
    if (val < res.best_val) {
      res.best_val = val;
      res.best_epoch = epoch;
      res.best_params = res.params;
      save_best();
    }
  }
  if (!cfg.out_dir.empty())
    save_checkpoint(cfg.out_dir + "/last.ckpt", cfg.model, res.params);
  return res;
}

}  // namespace mtvrp
