#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtvrp/autodiff.hpp"
#include "mtvrp/env.hpp"
#include "mtvrp/errors.hpp"
#include "mtvrp/instance.hpp"
#include "mtvrp/model_config.hpp"

namespace mtvrp {

template <class T>
void register_tsnr_params(ad::ParamStore<T>& p, const ModelConfig& cfg) {
  const int d = cfg.dim;
  auto lin = [&](const std::string& name, int out, int in) {
    p.add(name + ".weight", out, in);
    p.add(name + ".bias", 1, out);
  };
  p.add("tsnr.q_norm.g", 1, d);
  p.add("tsnr.kv_norm.g", 1, d);
  lin("tsnr.q", d, d);
  lin("tsnr.k", d, d);
  lin("tsnr.v", d, d);
  p.add("tsnr.mlp_norm.g", 1, d);
  lin("tsnr.mlp.w1", 4 * d, d);
  lin("tsnr.mlp.w2", d, 4 * d);
}

// Pairwise node distances, symmetric with a zero diagonal. Computed once per
// instance.
inline Mat<double> node_distance_matrix(const Instance& ins) {
  const int m = ins.num_nodes();
  Mat<double> d(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const double v = ins.dist(i, j);
      d.at(i, j) = v;
      d.at(j, i) = v;
    }
  return d;
}

// Additive attention bias over the concatenated key axis [nodes | contexts]:
// the left block is the node-to-node matrix, and the context column for
// trajectory i repeats the distances to that trajectory's current node.
template <class T>
Mat<T> distance_bias(const Mat<double>& dnn, const std::vector<int>& positions) {
  const int m = dnn.rows;
  const int tr = static_cast<int>(positions.size());
  Mat<T> b(m, m + tr);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) b.at(r, c) = static_cast<T>(dnn.at(r, c));
    for (int i = 0; i < tr; ++i) b.at(r, m + i) = static_cast<T>(dnn.at(r, positions[i]));
  }
  return b;
}

// One biased-attention draw decides whether the shared node embeddings are
// refreshed this step; the draw is shared by all trajectories. p outside
// [0, 1] is rejected.
inline bool gate_update(double draw, bool training, double p_train, double p_test) {
  const double p = training ? p_train : p_test;
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("gate probability must be in [0, 1]");
  return draw < p;
}

// Re-embeds the shared node matrix: queries come from the previous node
// embeddings, keys/values from those embeddings concatenated with the step
// contexts, attention logits carry the distance bias (identical for every
// head), and a gated MLP residual finishes the update. weight_entries, when
// given, accrues the per-head attention weight-matrix size; attn0 captures
// the first head's attention weights.
template <class T>
ad::Var<T> re_embed(ad::Tape<T>& t, ad::ParamStore<T>& p, const ModelConfig& cfg,
                    ad::Var<T> h_prev, ad::Var<T> context, const Mat<T>& bias,
                    long* weight_entries = nullptr, Mat<T>* attn0 = nullptr) {
  const int d = cfg.dim;
  const int dh = d / cfg.heads;
  const T scl = static_cast<T>(1.0 / std::sqrt(static_cast<double>(d)));

  auto qin = t.rmsnorm(h_prev, t.param(p.find("tsnr.q_norm.g")));
  auto q = t.linear(qin, t.param(p.find("tsnr.q.weight")), t.param(p.find("tsnr.q.bias")));
  auto kvin = t.rmsnorm(t.concat_rows(h_prev, context), t.param(p.find("tsnr.kv_norm.g")));
  auto k = t.linear(kvin, t.param(p.find("tsnr.k.weight")), t.param(p.find("tsnr.k.bias")));
  auto v = t.linear(kvin, t.param(p.find("tsnr.v.weight")), t.param(p.find("tsnr.v.bias")));

  auto bias_var = t.input(bias);
  std::vector<ad::Var<T>> outs;
  for (int h = 0; h < cfg.heads; ++h) {
    auto qh = t.slice_cols(q, h * dh, (h + 1) * dh);
    auto kh = t.slice_cols(k, h * dh, (h + 1) * dh);
    auto vh = t.slice_cols(v, h * dh, (h + 1) * dh);
    auto scores = t.add(t.scale(t.matmul_nt(qh, kh), scl), bias_var);
    auto attn = t.softmax_rows(scores, Mat<uint8_t>());
    if (attn0 && h == 0) *attn0 = t.val(attn);
    outs.push_back(t.matmul_nn(attn, vh));
  }
  if (weight_entries) *weight_entries += static_cast<long>(t.val(q).rows) * t.val(k).rows;

  auto refreshed = t.add(q, t.concat_cols(outs));
  auto m = t.rmsnorm(refreshed, t.param(p.find("tsnr.mlp_norm.g")));
  m = t.linear(m, t.param(p.find("tsnr.mlp.w1.weight")), t.param(p.find("tsnr.mlp.w1.bias")));
  m = t.gelu(m);
  m = t.linear(m, t.param(p.find("tsnr.mlp.w2.weight")), t.param(p.find("tsnr.mlp.w2.bias")));
  auto out = t.add(refreshed, m);
  for (const T x : t.val(out).a)
    if (!std::isfinite(static_cast<double>(x))) throw NumericError("re-embedded nodes not finite");
  return out;
}

}  // namespace mtvrp
