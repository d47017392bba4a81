#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mtvrp/decoder.hpp"
#include "mtvrp/encoder.hpp"
#include "mtvrp/env.hpp"
#include "mtvrp/rgcr.hpp"
#include "mtvrp/tsnr.hpp"

namespace mtvrp {

template <class T>
void register_policy_params(ad::ParamStore<T>& p, const ModelConfig& cfg) {
  register_encoder_params(p, cfg);
  register_rgcr_params(p, cfg);
  register_tsnr_params(p, cfg);
  register_decoder_params(p, cfg);
}

template <class T>
ad::ParamStore<T> make_policy_params(const ModelConfig& cfg, uint64_t seed) {
  ad::ParamStore<T> p;
  register_policy_params(p, cfg);
  Rng rng(seed);
  p.init_uniform(rng);
  return p;
}

// Frozen decisions of a rollout, sufficient to replay it exactly: the action
// chosen per decoding step per trajectory, and whether the node embeddings
// were refreshed that step.
struct ReplayScript {
  std::vector<std::vector<int>> actions;
  std::vector<uint8_t> gates;
};

template <class T>
struct RolloutTrace {
  struct Step {
    bool gated = false;
    int attn_rows = 0, attn_keys = 0;  // per-head attention weight shape
    double max_abs_unmasked_logit = 0;
    double max_prob_rowsum_err = 0;
    double max_attn_rowsum_err = 0;  // re-embedding attention, head 0
  };
  std::vector<Step> steps;
  long tsnr_weight_entries = 0;
  bool keep_embeddings = false;
  std::vector<Mat<T>> embeddings;  // encoder output, then the live H per step
};

template <class T>
struct RolloutOptions {
  bool greedy = true;
  bool training_gate = false;  // pick p_train instead of p_test
  double p_train = 0.75;
  double p_test = 1.0;
  bool exclude_tsnr = false;   // structurally skip re-embedding
  const ReplayScript* replay = nullptr;
  RolloutTrace<T>* trace = nullptr;
};

template <class T>
struct RolloutResult {
  std::vector<int> starts;                 // forced first customer per trajectory
  std::vector<std::vector<int>> sequences; // origin depot + visited nodes
  std::vector<double> rewards;             // negative total length
  std::vector<uint8_t> complete;
  std::vector<double> logprob_values;
  ad::Var<T> logprob_sum;                  // T x 1, valid while the tape lives
  ReplayScript script;
  int steps = 0;
};

// Full decode: encode once, then per step reformulate the context from the
// live states, optionally re-embed the shared node matrix, and pick one node
// per trajectory until every trajectory is finished. Trajectory i is forced
// to start at customer i (no log-probability). Gate draws come from a stream
// split off rng so they never perturb action sampling.
template <class T>
RolloutResult<T> rollout(ad::Tape<T>& tape, ad::ParamStore<T>& params, const ModelConfig& cfg,
                         const Instance& ins, int n_traj, Rng& rng,
                         const RolloutOptions<T>& opt) {
  RolloutResult<T> res;
  auto h = encode(tape, params, cfg, ins);
  EnvState s = reset(ins, n_traj);
  Rng gate_rng = rng.split();

  res.starts.resize(n_traj);
  res.sequences.resize(n_traj);
  for (int i = 0; i < n_traj; ++i) {
    res.starts[i] = i;
    res.sequences[i].push_back(s.traj[i].start_depot);
  }

  // Forced first visits.
  {
    std::vector<int> first(n_traj);
    for (int i = 0; i < n_traj; ++i) {
      const int node = ins.node_of_customer(i);
      if (action_feasible(s, i, node)) {
        first[i] = node;
        res.sequences[i].push_back(node);
      } else {
        mark_stuck(s, i);
        first[i] = s.traj[i].start_depot;
      }
    }
    step(s, first);
  }

  const Mat<double> dnn = node_distance_matrix(ins);
  res.logprob_sum = tape.input(Mat<T>(n_traj, 1));
  if (opt.trace && opt.trace->keep_embeddings) opt.trace->embeddings.push_back(tape.val(h));

  const int max_steps = 2 * ins.n + ins.num_depots();
  while (!s.all_terminal()) {
    if (res.steps > max_steps) throw std::logic_error("rollout exceeded the step bound");
    const int j = res.steps;

    auto context = build_context(tape, params, cfg, ins, s, h);

    bool apply = false;
    if (!opt.exclude_tsnr) {
      if (opt.replay)
        apply = opt.replay->gates[j] != 0;
      else
        apply = gate_update(gate_rng.real(), opt.training_gate, opt.p_train, opt.p_test);
    }
    typename RolloutTrace<T>::Step tstep;
    tstep.gated = apply;
    if (apply) {
      std::vector<int> pos(n_traj);
      for (int i = 0; i < n_traj; ++i) pos[i] = s.traj[i].position;
      const Mat<T> bias = distance_bias<T>(dnn, pos);
      long* counter = opt.trace ? &opt.trace->tsnr_weight_entries : nullptr;
      Mat<T> attn0;
      h = re_embed(tape, params, cfg, h, context, bias, counter,
                   opt.trace ? &attn0 : nullptr);
      tstep.attn_rows = opt.trace ? attn0.rows : ins.num_nodes();
      tstep.attn_keys = opt.trace ? attn0.cols : ins.num_nodes() + n_traj;
      if (opt.trace) {
        for (int r = 0; r < attn0.rows; ++r) {
          double rowsum = 0;
          for (int c = 0; c < attn0.cols; ++c) rowsum += static_cast<double>(attn0.at(r, c));
          tstep.max_attn_rowsum_err = std::max(tstep.max_attn_rowsum_err, std::abs(rowsum - 1.0));
        }
      }
    }

    Mat<uint8_t> mask = feasible_mask(s);
    std::vector<uint8_t> was_active(n_traj);
    for (int i = 0; i < n_traj; ++i) {
      const TrajState& st = s.traj[i];
      was_active[i] = !st.done && !st.stuck;
      if (!was_active[i]) continue;
      // Fresh at a depot with nothing reachable: the mask collapsed to the
      // origin; the trajectory cannot finish.
      bool only_origin = mask.at(i, st.start_depot) == 1;
      for (int c = 0; c < ins.num_nodes() && only_origin; ++c)
        if (c != st.start_depot && mask.at(i, c)) only_origin = false;
      if (only_origin && st.served_in_subroute == 0) {
        mark_stuck(s, i);
        was_active[i] = 0;
      }
    }

    auto dec = step_probabilities(tape, params, cfg, context, h, mask);
    const Mat<T>& lp = tape.val(dec.log_probs);

    std::vector<int> actions(n_traj);
    for (int i = 0; i < n_traj; ++i) {
      if (!was_active[i]) {
        actions[i] = s.traj[i].start_depot;
        continue;
      }
      if (opt.replay)
        actions[i] = opt.replay->actions[j][i];
      else
        actions[i] = select_action(lp, mask, i, opt.greedy, &rng);
      res.sequences[i].push_back(actions[i]);
    }
    res.script.actions.push_back(actions);
    res.script.gates.push_back(apply ? 1 : 0);

    res.logprob_sum = tape.add(res.logprob_sum, tape.gather_cols_per_row(dec.log_probs, actions));

    if (opt.trace) {
      for (int i = 0; i < n_traj; ++i) {
        double rowsum = 0;
        for (int c = 0; c < mask.cols; ++c) {
          if (!mask.at(i, c)) continue;
          rowsum += std::exp(static_cast<double>(lp.at(i, c)));
          tstep.max_abs_unmasked_logit = std::max(
              tstep.max_abs_unmasked_logit, std::abs(static_cast<double>(dec.logits.at(i, c))));
        }
        tstep.max_prob_rowsum_err = std::max(tstep.max_prob_rowsum_err, std::abs(rowsum - 1.0));
      }
      opt.trace->steps.push_back(tstep);
      if (opt.trace->keep_embeddings) opt.trace->embeddings.push_back(tape.val(h));
    }

    step(s, actions);
    ++res.steps;
  }

  res.rewards.resize(n_traj);
  res.complete.resize(n_traj);
  for (int i = 0; i < n_traj; ++i) {
    res.rewards[i] = -s.traj[i].total_dist;
    res.complete[i] = s.traj[i].done && !s.traj[i].stuck;
  }
  const Mat<T>& lps = tape.val(res.logprob_sum);
  res.logprob_values.resize(n_traj);
  for (int i = 0; i < n_traj; ++i) res.logprob_values[i] = static_cast<double>(lps.at(i, 0));
  return res;
}

// Shared-baseline policy-gradient surrogate: advantages are rewards minus
// their mean, treated as constants; the scalar is
// -(1/T) * sum_i (R_i - b) * logprob_sum_i.
template <class T>
ad::Var<T> reinforce_loss(ad::Tape<T>& tape, const RolloutResult<T>& r,
                          const std::vector<double>& rewards) {
  const int n = static_cast<int>(rewards.size());
  double b = 0;
  for (double x : rewards) b += x;
  b /= n;
  std::vector<T> w(n);
  for (int i = 0; i < n; ++i) w[i] = static_cast<T>(-(rewards[i] - b) / n);
  return tape.weighted_sum(r.logprob_sum, w);
}

}  // namespace mtvrp
