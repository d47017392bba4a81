#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mtvrp/autodiff.hpp"
#include "mtvrp/env.hpp"
#include "mtvrp/errors.hpp"
#include "mtvrp/instance.hpp"
#include "mtvrp/model_config.hpp"

namespace mtvrp {

template <class T>
void register_encoder_params(ad::ParamStore<T>& p, const ModelConfig& cfg) {
  const int d = cfg.dim;
  auto lin = [&](const std::string& name, int out, int in) {
    p.add(name + ".weight", out, in);
    p.add(name + ".bias", 1, out);
  };
  lin("enc.depot", d, 4);
  lin("enc.cust", d, 7);
  lin("enc.label", d, 4);
  lin("enc.fuse", d, 2 * d);
  for (int l = 0; l < cfg.layers; ++l) {
    for (const char* br : {"g", "s"}) {
      const std::string base = "enc.l" + std::to_string(l) + "." + br;
      p.add(base + ".attn.norm.g", 1, d);
      lin(base + ".attn.q", d, d);
      lin(base + ".attn.k", d, d);
      lin(base + ".attn.v", d, d);
      lin(base + ".attn.o", d, d);
      p.add(base + ".ffn.norm.g", 1, d);
      lin(base + ".ffn.w1", cfg.hidden, d);
      lin(base + ".ffn.w2", d, cfg.hidden);
    }
    lin("enc.l" + std::to_string(l) + ".fuse_g", d, d);
    lin("enc.l" + std::to_string(l) + ".fuse_s", d, d);
  }
  p.add("enc.final_norm.g", 1, d);
}

namespace detail {

template <class T>
void check_finite(ad::Tape<T>& t, ad::Var<T> x, const std::string& where) {
  for (const T v : t.val(x).a)
    if (!std::isfinite(static_cast<double>(v))) throw NumericError(where + " is not finite");
}

// Pre-norm multi-head self-attention + feed-forward. topk < 1 means dense
// attention; otherwise each query attends to its topk highest-scoring keys.
template <class T>
ad::Var<T> transformer_layer(ad::Tape<T>& t, ad::ParamStore<T>& p, const ModelConfig& cfg,
                             const std::string& base, ad::Var<T> x, int topk) {
  const int dh = cfg.dim / cfg.heads;
  const T scl = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));

  auto a = t.rmsnorm(x, t.param(p.find(base + ".attn.norm.g")));
  auto q = t.linear(a, t.param(p.find(base + ".attn.q.weight")), t.param(p.find(base + ".attn.q.bias")));
  auto k = t.linear(a, t.param(p.find(base + ".attn.k.weight")), t.param(p.find(base + ".attn.k.bias")));
  auto v = t.linear(a, t.param(p.find(base + ".attn.v.weight")), t.param(p.find(base + ".attn.v.bias")));

  std::vector<ad::Var<T>> outs;
  for (int h = 0; h < cfg.heads; ++h) {
    auto qh = t.slice_cols(q, h * dh, (h + 1) * dh);
    auto kh = t.slice_cols(k, h * dh, (h + 1) * dh);
    auto vh = t.slice_cols(v, h * dh, (h + 1) * dh);
    auto scores = t.scale(t.matmul_nt(qh, kh), scl);
    auto attn = topk >= 1 ? t.softmax_topk_rows(scores, topk) : t.softmax_rows(scores, Mat<uint8_t>());
    outs.push_back(t.matmul_nn(attn, vh));
  }
  auto o = t.linear(t.concat_cols(outs), t.param(p.find(base + ".attn.o.weight")),
                    t.param(p.find(base + ".attn.o.bias")));
  x = t.add(x, o);

  auto f = t.rmsnorm(x, t.param(p.find(base + ".ffn.norm.g")));
  f = t.linear(f, t.param(p.find(base + ".ffn.w1.weight")), t.param(p.find(base + ".ffn.w1.bias")));
  f = t.gelu(f);
  f = t.linear(f, t.param(p.find(base + ".ffn.w2.weight")), t.param(p.find(base + ".ffn.w2.bias")));
  return t.add(x, f);
}

}  // namespace detail

// Raw input features: depots as {x, y, open, limit}, customers as
// {x, y, dl, db, te, tl, ts}, plus the constraint switch one-hot
// {backhaul, open, limit, tw}.
template <class T>
struct InputFeatures {
  Mat<T> depot;  // n_dep x 4
  Mat<T> cust;   // n x 7
  Mat<T> label;  // 1 x 4
};

template <class T>
InputFeatures<T> input_features(const Instance& ins, const ModelConfig& cfg) {
  const auto cap = [&](double v) { return static_cast<T>(std::min(v, cfg.feature_time_cap)); };
  InputFeatures<T> f;
  f.depot = Mat<T>(ins.num_depots(), 4);
  for (int d = 0; d < ins.num_depots(); ++d) {
    f.depot.at(d, 0) = static_cast<T>(ins.depots[d][0]);
    f.depot.at(d, 1) = static_cast<T>(ins.depots[d][1]);
    f.depot.at(d, 2) = static_cast<T>(ins.variant.open ? 1 : 0);
    f.depot.at(d, 3) = cap(ins.duration_limit);
  }
  f.cust = Mat<T>(ins.n, 7);
  for (int i = 0; i < ins.n; ++i) {
    const Customer& c = ins.customers[i];
    f.cust.at(i, 0) = static_cast<T>(c.x);
    f.cust.at(i, 1) = static_cast<T>(c.y);
    f.cust.at(i, 2) = static_cast<T>(c.dl);
    f.cust.at(i, 3) = static_cast<T>(c.db);
    f.cust.at(i, 4) = static_cast<T>(c.te);
    f.cust.at(i, 5) = cap(c.tl);
    f.cust.at(i, 6) = static_cast<T>(c.ts);
  }
  f.label = Mat<T>(1, 4);
  f.label.at(0, 0) = static_cast<T>(ins.variant.backhaul ? 1 : 0);
  f.label.at(0, 1) = static_cast<T>(ins.variant.open ? 1 : 0);
  f.label.at(0, 2) = static_cast<T>(ins.variant.duration_limit ? 1 : 0);
  f.label.at(0, 3) = static_cast<T>(ins.variant.time_windows ? 1 : 0);
  return f;
}

// Projects raw features into the shared space: I stacks depot and customer
// embeddings, and the fused embeddings append the broadcast constraint label
// before a 2D -> D projection.
template <class T>
struct EmbeddedInputs {
  ad::Var<T> plain;  // (n_dep + n) x D
  ad::Var<T> fused;  // (n_dep + n) x D
};

template <class T>
EmbeddedInputs<T> embed_inputs(ad::Tape<T>& t, ad::ParamStore<T>& p, const ModelConfig& cfg,
                               const Instance& ins) {
  const auto f = input_features<T>(ins, cfg);
  auto dep = t.linear(t.input(f.depot), t.param(p.find("enc.depot.weight")),
                      t.param(p.find("enc.depot.bias")));
  auto cus = t.linear(t.input(f.cust), t.param(p.find("enc.cust.weight")),
                      t.param(p.find("enc.cust.bias")));
  auto plain = t.concat_rows(dep, cus);

  auto lab = t.linear(t.input(f.label), t.param(p.find("enc.label.weight")),
                      t.param(p.find("enc.label.bias")));
  std::vector<int> expand(ins.num_nodes(), 0);
  auto lab_rows = t.gather_rows(lab, expand);
  auto fused = t.linear(t.concat_cols({plain, lab_rows}), t.param(p.find("enc.fuse.weight")),
                        t.param(p.find("enc.fuse.bias")));
  return {plain, fused};
}

// Dual-branch encoder: a dense branch refines the fused embeddings, a sparse
// top-k branch refines the plain ones, and the branches exchange information
// through per-layer linear fusions. Output is the RMS-normed dense branch.
template <class T>
ad::Var<T> encode(ad::Tape<T>& t, ad::ParamStore<T>& p, const ModelConfig& cfg,
                  const Instance& ins) {
  auto emb = embed_inputs(t, p, cfg, ins);
  ad::Var<T> hg = emb.fused;   // dense ("global") branch state
  ad::Var<T> hs = emb.plain;   // sparse branch state
  const int topk = cfg.sparse_topk >= 1 ? cfg.sparse_topk : (ins.n + 1) / 2;

  for (int l = 0; l < cfg.layers; ++l) {
    const std::string lbase = "enc.l" + std::to_string(l);
    auto hg2 = detail::transformer_layer(t, p, cfg, lbase + ".g", hg, 0);
    if (cfg.single_branch) {
      hg = hg2;
    } else {
      auto hs2 = detail::transformer_layer(t, p, cfg, lbase + ".s", hs, topk);
      hg = t.add(hg2, t.linear(hs2, t.param(p.find(lbase + ".fuse_g.weight")),
                               t.param(p.find(lbase + ".fuse_g.bias"))));
      hs = t.add(hs2, t.linear(hg2, t.param(p.find(lbase + ".fuse_s.weight")),
                               t.param(p.find(lbase + ".fuse_s.bias"))));
    }
    detail::check_finite(t, hg, "encoder layer " + std::to_string(l) + " output");
  }
  return t.rmsnorm(hg, t.param(p.find("enc.final_norm.g")));
}

}  // namespace mtvrp
