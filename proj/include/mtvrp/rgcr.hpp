#pragma once

#include <string>
#include <vector>

#include "mtvrp/autodiff.hpp"
#include "mtvrp/env.hpp"
#include "mtvrp/instance.hpp"
#include "mtvrp/model_config.hpp"

namespace mtvrp {

template <class T>
void register_rgcr_params(ad::ParamStore<T>& p, const ModelConfig& cfg) {
  const int d = cfg.dim;
  auto lin = [&](const std::string& name, int out, int in) {
    p.add(name + ".weight", out, in);
    p.add(name + ".bias", 1, out);
  };
  lin("rgcr.b", d, 3);
  lin("rgcr.l", d, 3);
  lin("rgcr.o", d, 3);
  lin("rgcr.tw", d, 4);
  lin("rgcr.concat", d, 4 * d);
  lin("rgcr.out", d, 2 * d);
}

// Per-trajectory constraint attributes read off the environment state:
//   capacity view  {dl at current node, db at current node, remaining load}
//   length view    {x, y, remaining sub-route budget}
//   open view      {x, y, total distance traveled}
//   window view    {earliest, latest, service, current time}
// Absent-constraint sentinels saturate at the feature cap.
template <class T>
struct ConstraintAttributes {
  Mat<T> b;   // T x 3
  Mat<T> l;   // T x 3
  Mat<T> o;   // T x 3
  Mat<T> tw;  // T x 4
};

template <class T>
ConstraintAttributes<T> constraint_attributes(const Instance& ins, const EnvState& s,
                                              const ModelConfig& cfg) {
  const auto cap = [&](double v) { return static_cast<T>(std::min(v, cfg.feature_time_cap)); };
  ConstraintAttributes<T> a;
  a.b = Mat<T>(s.n_traj, 3);
  a.l = Mat<T>(s.n_traj, 3);
  a.o = Mat<T>(s.n_traj, 3);
  a.tw = Mat<T>(s.n_traj, 4);
  for (int t = 0; t < s.n_traj; ++t) {
    const TrajState& st = s.traj[t];
    const int node = st.position;
    const bool dep = ins.is_depot(node);
    const Customer* cu = dep ? nullptr : &ins.customers[ins.customer_of(node)];

    a.b.at(t, 0) = dep ? T(0) : static_cast<T>(cu->dl);
    a.b.at(t, 1) = dep ? T(0) : static_cast<T>(cu->db);
    a.b.at(t, 2) = static_cast<T>(ins.capacity - st.delivered - st.collected);

    a.l.at(t, 0) = static_cast<T>(ins.node_x(node));
    a.l.at(t, 1) = static_cast<T>(ins.node_y(node));
    a.l.at(t, 2) = cap(ins.duration_limit - st.subroute_dist);

    a.o.at(t, 0) = static_cast<T>(ins.node_x(node));
    a.o.at(t, 1) = static_cast<T>(ins.node_y(node));
    a.o.at(t, 2) = static_cast<T>(st.total_dist);

    a.tw.at(t, 0) = dep ? T(0) : static_cast<T>(cu->te);
    a.tw.at(t, 1) = dep ? cap(HORIZON_INF) : cap(cu->tl);
    a.tw.at(t, 2) = dep ? T(0) : static_cast<T>(cu->ts);
    a.tw.at(t, 3) = static_cast<T>(st.time);
  }
  return a;
}

// Builds the step context: constraint embeddings are scored against the
// current node embedding by raw dot products, combined as a score-weighted
// sum plus a learned projection of their concatenation, then fused with the
// node embedding itself.
template <class T>
ad::Var<T> build_context(ad::Tape<T>& t, ad::ParamStore<T>& p, const ModelConfig& cfg,
                         const Instance& ins, const EnvState& s, ad::Var<T> h_prev) {
  const auto attrs = constraint_attributes<T>(ins, s, cfg);
  auto lin = [&](const char* name, Mat<T> x) {
    return t.linear(t.input(std::move(x)), t.param(p.find(std::string("rgcr.") + name + ".weight")),
                    t.param(p.find(std::string("rgcr.") + name + ".bias")));
  };
  auto cb = lin("b", attrs.b);
  auto cl = lin("l", attrs.l);
  auto co = lin("o", attrs.o);
  auto ctw = lin("tw", attrs.tw);

  std::vector<int> pos(s.n_traj);
  for (int i = 0; i < s.n_traj; ++i) pos[i] = s.traj[i].position;
  auto h_tau = t.gather_rows(h_prev, pos);

  auto blended = t.linear(t.concat_cols({cb, cl, co, ctw}), t.param(p.find("rgcr.concat.weight")),
                          t.param(p.find("rgcr.concat.bias")));
  auto weighted = t.add(t.add(t.scale_rows(cb, t.rowwise_dot(h_tau, cb)),
                              t.scale_rows(cl, t.rowwise_dot(h_tau, cl))),
                        t.add(t.scale_rows(co, t.rowwise_dot(h_tau, co)),
                              t.scale_rows(ctw, t.rowwise_dot(h_tau, ctw))));
  auto summary = t.add(blended, weighted);
  return t.linear(t.concat_cols({summary, h_tau}), t.param(p.find("rgcr.out.weight")),
                  t.param(p.find("rgcr.out.bias")));
}

}  // namespace mtvrp
