#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mtvrp/autodiff.hpp"
#include "mtvrp/model_config.hpp"
#include "mtvrp/rng.hpp"

namespace mtvrp {

template <class T>
void register_decoder_params(ad::ParamStore<T>& p, const ModelConfig& cfg) {
  const int d = cfg.dim;
  auto lin = [&](const std::string& name, int out, int in) {
    p.add(name + ".weight", out, in);
    p.add(name + ".bias", 1, out);
  };
  lin("dec.k", d, d);
  lin("dec.v", d, d);
  lin("dec.glimpse_out", d, d);
  lin("dec.final_k", d, d);
}

template <class T>
struct DecoderOut {
  ad::Var<T> log_probs;  // T x nodes, -inf at masked entries
  Mat<T> logits;         // clipped pre-softmax scores (valid where unmasked)
};

// Pointer step: contexts query the node embeddings through a masked
// multi-head glimpse, then a single-head compatibility produces tanh-clipped
// logits over feasible nodes.
template <class T>
DecoderOut<T> step_probabilities(ad::Tape<T>& t, ad::ParamStore<T>& p, const ModelConfig& cfg,
                                 ad::Var<T> context, ad::Var<T> nodes, const Mat<uint8_t>& mask) {
  const int d = cfg.dim;
  const int dh = d / cfg.heads;
  const T scl = static_cast<T>(1.0 / std::sqrt(static_cast<double>(d)));

  auto k = t.linear(nodes, t.param(p.find("dec.k.weight")), t.param(p.find("dec.k.bias")));
  auto v = t.linear(nodes, t.param(p.find("dec.v.weight")), t.param(p.find("dec.v.bias")));

  std::vector<ad::Var<T>> outs;
  for (int h = 0; h < cfg.heads; ++h) {
    auto qh = t.slice_cols(context, h * dh, (h + 1) * dh);
    auto kh = t.slice_cols(k, h * dh, (h + 1) * dh);
    auto vh = t.slice_cols(v, h * dh, (h + 1) * dh);
    auto attn = t.softmax_rows(t.scale(t.matmul_nt(qh, kh), scl), mask);
    outs.push_back(t.matmul_nn(attn, vh));
  }
  auto glimpse = t.linear(t.concat_cols(outs), t.param(p.find("dec.glimpse_out.weight")),
                          t.param(p.find("dec.glimpse_out.bias")));
  auto fk = t.linear(nodes, t.param(p.find("dec.final_k.weight")), t.param(p.find("dec.final_k.bias")));
  auto logits = t.scale(t.tanh_op(t.scale(t.matmul_nt(glimpse, fk), scl)),
                        static_cast<T>(cfg.logit_clip));
  DecoderOut<T> out;
  out.logits = t.val(logits);
  out.log_probs = t.log_softmax_rows(logits, mask);
  return out;
}

// Greedy: highest probability, ties to the lowest node index. Sampling draws
// from the masked distribution.
template <class T>
int select_action(const Mat<T>& log_probs, const Mat<uint8_t>& mask, int row, bool greedy,
                  Rng* rng) {
  const int n = log_probs.cols;
  if (greedy) {
    int best = -1;
    T best_lp = T(0);
    for (int c = 0; c < n; ++c) {
      if (!mask.at(row, c)) continue;
      const T lp = log_probs.at(row, c);
      if (best < 0 || lp > best_lp) {
        best = c;
        best_lp = lp;
      }
    }
    return best;
  }
  const double u = rng->real();
  double acc = 0;
  int last = -1;
  for (int c = 0; c < n; ++c) {
    if (!mask.at(row, c)) continue;
    acc += std::exp(static_cast<double>(log_probs.at(row, c)));
    last = c;
    if (u < acc) return c;
  }
  return last;  // numerical slack: acc may end slightly below 1
}

}  // namespace mtvrp
