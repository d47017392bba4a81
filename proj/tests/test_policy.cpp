#include <cmath>
#include <numeric>

#include "doctest.h"
#include "mtvrp/policy.hpp"
#include "mtvrp/validate.hpp"
#include "support/brute.hpp"

using namespace mtvrp;

namespace {

ModelConfig tiny() {
  ModelConfig cfg;
  cfg.dim = 8;
  cfg.heads = 2;
  cfg.hidden = 16;
  cfg.layers = 1;
  return cfg;
}

}  // namespace

TEST_CASE("greedy rollouts are deterministic and always valid") {
  const ModelConfig cfg = tiny();
  for (const char* name : {"CVRP", "OVRPL", "VRPB", "MDVRPTW", "VRPMBTW"}) {
    const Instance ins = generate(variant_from_name(name), 8, 101);
    auto params = make_policy_params<double>(cfg, 3);
    auto run = [&] {
      ad::Tape<double> tape(&params, false);
      Rng rng(55);
      RolloutOptions<double> opt;
      return rollout(tape, params, cfg, ins, 8, rng, opt);
    };
    const auto a = run();
    const auto b = run();
    REQUIRE(a.sequences.size() == 8);
    for (int t = 0; t < 8; ++t) {
      CHECK(a.starts[t] == t);
      CHECK(a.sequences[t] == b.sequences[t]);
      CHECK(a.rewards[t] == b.rewards[t]);
      REQUIRE(a.complete[t] == 1);
      const auto rep = validate_solution(ins, a.sequences[t]);
      INFO(name << " traj " << t << ": " << rep.str());
      CHECK(rep.ok);
      // Reward equals the negated replayed length.
      CHECK(a.rewards[t] ==
            doctest::Approx(finalize_reward(ins, a.sequences[t])).epsilon(1e-12));
      CHECK(std::isfinite(a.logprob_values[t]));
      CHECK(a.logprob_values[t] <= 1e-12);
    }
  }
}

TEST_CASE("forced starts differ across trajectories") {
  const ModelConfig cfg = tiny();
  const Instance ins = generate(variant_from_name("CVRP"), 6, 7);
  auto params = make_policy_params<double>(cfg, 5);
  ad::Tape<double> tape(&params, false);
  Rng rng(1);
  RolloutOptions<double> opt;
  const auto r = rollout(tape, params, cfg, ins, 6, rng, opt);
  for (int t = 0; t < 6; ++t) {
    REQUIRE(r.sequences[t].size() >= 2);
    CHECK(ins.is_depot(r.sequences[t][0]));
    // First visited node is the committed customer.
    CHECK(r.sequences[t][1] == ins.node_of_customer(t));
  }
}

TEST_CASE("replaying a recorded script reproduces the rollout bitwise") {
  const ModelConfig cfg = tiny();
  const Instance ins = generate(variant_from_name("MDOVRPBLTW"), 7, 77);
  auto params = make_policy_params<double>(cfg, 9);
  RolloutOptions<double> opt;
  opt.greedy = false;
  opt.training_gate = true;  // exercises the stochastic gate stream too
  ad::Tape<double> t1(&params, false);
  Rng r1(13);
  const auto first = rollout(t1, params, cfg, ins, 7, r1, opt);

  RolloutOptions<double> opt2;
  opt2.replay = &first.script;
  ad::Tape<double> t2(&params, false);
  Rng r2(999);  // unused under replay
  const auto second = rollout(t2, params, cfg, ins, 7, r2, opt2);
  CHECK(first.steps == second.steps);
  for (int t = 0; t < 7; ++t) {
    CHECK(first.sequences[t] == second.sequences[t]);
    CHECK(first.rewards[t] == second.rewards[t]);
    CHECK(first.logprob_values[t] == second.logprob_values[t]);
  }
}

TEST_CASE("static decode equals the gate-excised model") {
  const ModelConfig cfg = tiny();
  const Instance ins = generate(variant_from_name("VRPTW"), 8, 31);
  auto params = make_policy_params<double>(cfg, 21);
  auto run = [&](bool excise) {
    ad::Tape<double> tape(&params, false);
    Rng rng(4);
    RolloutOptions<double> opt;
    opt.p_test = 0.0;
    opt.exclude_tsnr = excise;
    return rollout(tape, params, cfg, ins, 8, rng, opt);
  };
  const auto gated = run(false);
  const auto excised = run(true);
  for (int t = 0; t < 8; ++t) {
    CHECK(gated.sequences[t] == excised.sequences[t]);
    CHECK(gated.rewards[t] == excised.rewards[t]);
    CHECK(gated.logprob_values[t] == excised.logprob_values[t]);
  }
}

TEST_CASE("rollout trace reports gates, attention shapes and sane rows") {
  const ModelConfig cfg = tiny();
  const Instance ins = generate(variant_from_name("VRPL"), 6, 17);
  auto params = make_policy_params<double>(cfg, 2);
  RolloutTrace<double> trace;
  RolloutOptions<double> opt;
  opt.trace = &trace;
  ad::Tape<double> tape(&params, false);
  Rng rng(8);
  const auto r = rollout(tape, params, cfg, ins, 6, rng, opt);
  REQUIRE(static_cast<int>(trace.steps.size()) == r.steps);
  const int m = ins.num_nodes();
  long expected_entries = 0;
  for (const auto& st : trace.steps) {
    CHECK(st.gated);  // p_test defaults to 1
    CHECK(st.attn_rows == m);
    CHECK(st.attn_keys == m + 6);
    CHECK(st.max_abs_unmasked_logit <= cfg.logit_clip + 1e-12);
    CHECK(st.max_prob_rowsum_err < 1e-6);
    CHECK(st.max_attn_rowsum_err < 1e-6);
    expected_entries += static_cast<long>(st.attn_rows) * st.attn_keys;
  }
  CHECK(trace.tsnr_weight_entries == expected_entries);
}

TEST_CASE("sampled rewards sit between the exhaustive best and worst") {
  const ModelConfig cfg = tiny();
  const Instance ins = generate(variant_from_name("CVRP"), 6, 91);
  const auto brute = support::brute_force(ins);
  auto params = make_policy_params<double>(cfg, 6);
  ad::Tape<double> tape(&params, false);
  Rng rng(30);
  RolloutOptions<double> opt;
  opt.greedy = false;
  const auto r = rollout(tape, params, cfg, ins, 6, rng, opt);
  for (int t = 0; t < 6; ++t) {
    REQUIRE(r.complete[t] == 1);
    const double len = -r.rewards[t];
    CHECK(len >= brute.best - 1e-9);
    CHECK(len <= brute.worst + 1e-9);
  }
}

TEST_CASE("policy loss weights advantages against the shared baseline") {
  const ModelConfig cfg = tiny();
  const Instance ins = generate(variant_from_name("CVRP"), 4, 3);
  auto params = make_policy_params<double>(cfg, 7);
  params.zero_grad();
  ad::Tape<double> tape(&params, true);
  Rng rng(2);
  RolloutOptions<double> opt;
  opt.greedy = false;
  const auto r = rollout(tape, params, cfg, ins, 4, rng, opt);
  // Identical rewards mean zero advantage everywhere, so no gradient at all.
  const std::vector<double> flat(4, -1.25);
  auto loss = reinforce_loss(tape, r, flat);
  CHECK(tape.val(loss).at(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  tape.backward(loss);
  double gnorm = 0;
  for (const auto& e : params.entries)
    for (double g : e.grad.a) gnorm += g * g;
  CHECK(std::sqrt(gnorm) < 1e-12);
}

TEST_CASE("shifting every reward by a constant leaves the gradient alone") {
  const ModelConfig cfg = tiny();
  const Instance ins = generate(variant_from_name("VRPB"), 5, 41);
  auto params = make_policy_params<double>(cfg, 11);
  auto grads_for = [&](double shift) {
    params.zero_grad();
    ad::Tape<double> tape(&params, true);
    Rng rng(6);
    RolloutOptions<double> opt;
    opt.greedy = false;
    const auto r = rollout(tape, params, cfg, ins, 5, rng, opt);
    std::vector<double> rw = r.rewards;
    for (double& x : rw) x += shift;
    tape.backward(reinforce_loss(tape, r, rw));
    std::vector<double> out;
    for (const auto& e : params.entries)
      out.insert(out.end(), e.grad.a.begin(), e.grad.a.end());
    return out;
  };
  const auto g0 = grads_for(0.0);
  const auto g1 = grads_for(10.0);
  double diff = 0;
  for (size_t i = 0; i < g0.size(); ++i) diff += (g0[i] - g1[i]) * (g0[i] - g1[i]);
  CHECK(std::sqrt(diff) < 1e-9);
}

TEST_CASE("rollout halts within the step bound on every variant family") {
  const ModelConfig cfg = tiny();
  for (const char* name : {"MDCVRP", "OVRPMBTW", "VRPBLTW"}) {
    const Instance ins = generate(variant_from_name(name), 10, 19);
    auto params = make_policy_params<double>(cfg, 1);
    ad::Tape<double> tape(&params, false);
    Rng rng(9);
    RolloutOptions<double> opt;
    opt.greedy = false;
    const auto r = rollout(tape, params, cfg, ins, 10, rng, opt);
    CHECK(r.steps <= 2 * 10 + ins.num_depots());
    for (int t = 0; t < 10; ++t) CHECK(r.complete[t] == 1);
  }
}
