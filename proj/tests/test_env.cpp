#include <array>
#include <cmath>

#include "doctest.h"
#include "mtvrp/env.hpp"
#include "mtvrp/rng.hpp"
#include "support/checkers.hpp"

using namespace mtvrp;

namespace {

Instance make_manual(const std::string& variant, std::vector<std::array<double, 2>> depots,
                     std::vector<Customer> customers, double capacity = 1.0,
                     double duration_limit = HORIZON_INF, double horizon = HORIZON_INF) {
  Instance ins;
  ins.variant = variant_from_name(variant);
  ins.depots = std::move(depots);
  ins.customers = std::move(customers);
  ins.n = static_cast<int>(ins.customers.size());
  ins.capacity = capacity;
  ins.duration_limit = duration_limit;
  ins.horizon = horizon;
  return ins;
}

Customer cust(double x, double y, double dl, double db = 0, double te = 0,
              double tl = HORIZON_INF, double ts = 0) {
  Customer c;
  c.x = x;
  c.y = y;
  c.dl = dl;
  c.db = db;
  c.te = te;
  c.tl = tl;
  c.ts = ts;
  return c;
}

}  // namespace

TEST_CASE("reset places trajectories at depots round-robin") {
  const Instance md = generate(variant_from_name("MDCVRP"), 8, 5);
  EnvState s = reset(md, 8);
  for (int t = 0; t < 8; ++t) {
    CHECK(s.traj[t].start_depot == t % 3);
    CHECK(s.traj[t].position == t % 3);
  }
  const Instance sd = generate(variant_from_name("CVRP"), 8, 5);
  EnvState s2 = reset(sd, 4);
  for (int t = 0; t < 4; ++t) CHECK(s2.traj[t].start_depot == 0);
  CHECK_THROWS_AS(reset(sd, 0), std::invalid_argument);
  CHECK_THROWS_AS(reset(sd, 9), std::invalid_argument);
}

TEST_CASE("hand-checked closed route accumulates distance and load") {
  // Depot at origin, two customers up the y axis.
  auto ins = make_manual("CVRP", {{0, 0}}, {cust(0, 0.3, 0.2), cust(0, 0.8, 0.3)});
  EnvState s = reset(ins, 1);
  step(s, {1});
  CHECK(s.traj[0].total_dist == doctest::Approx(0.3));
  CHECK(s.traj[0].delivered == doctest::Approx(0.2));
  CHECK_FALSE(s.traj[0].done);
  step(s, {2});
  // Return leg 0.8 is added when the last customer closes the tour.
  CHECK(s.traj[0].total_dist == doctest::Approx(0.3 + 0.5 + 0.8));
  CHECK(s.traj[0].done);
  CHECK(finalize_reward(ins, {0, 1, 2}) == doctest::Approx(-1.6));
}

TEST_CASE("open routes drop every empty return leg") {
  auto ins = make_manual("OVRP", {{0, 0}}, {cust(0, 0.3, 0.2), cust(0, 0.8, 0.9)});
  EnvState s = reset(ins, 1);
  step(s, {1});
  step(s, {0});  // close the sub-route: free for open
  CHECK(s.traj[0].total_dist == doctest::Approx(0.3));
  step(s, {2});
  CHECK(s.traj[0].done);
  CHECK(s.traj[0].total_dist == doctest::Approx(0.3 + 0.8));
  CHECK(finalize_reward(ins, {0, 1, 0, 2}) == doctest::Approx(-1.1));
  // The closed twin pays both returns.
  auto closed = make_manual("CVRP", {{0, 0}}, {cust(0, 0.3, 0.2), cust(0, 0.8, 0.9)});
  CHECK(finalize_reward(closed, {0, 1, 0, 2}) == doctest::Approx(-(0.3 + 0.3 + 0.8 + 0.8)));
}

TEST_CASE("capacity masks deliveries and pickups separately unless mixed") {
  auto ins = make_manual("VRPB", {{0, 0}},
                         {cust(0.1, 0, 0.6), cust(0.2, 0, 0.6), cust(0.3, 0, 0, 0.7),
                          cust(0.4, 0, 0, 0.7)});
  EnvState s = reset(ins, 1);
  step(s, {1});
  // Second 0.6 delivery exceeds capacity 1; pickups still fit.
  CHECK_FALSE(action_feasible(s, 0, 2));
  CHECK(action_feasible(s, 0, 3));
  step(s, {3});
  // After one pickup the linehaul customer is blocked within this sub-route.
  CHECK_FALSE(action_feasible(s, 0, 2));
  CHECK_FALSE(action_feasible(s, 0, 4));  // second pickup over pickup capacity
  step(s, {0});
  // Fresh sub-route: delivery feasible again.
  CHECK(action_feasible(s, 0, 2));
}

TEST_CASE("mixed pickups pool into one load") {
  auto ins = make_manual("VRPMB", {{0, 0}},
                         {cust(0.1, 0, 0.5), cust(0.2, 0, 0, 0.4), cust(0.3, 0, 0.2)});
  EnvState s = reset(ins, 1);
  step(s, {1});
  step(s, {2});
  // delivered 0.5 + collected 0.4 + next delivery 0.2 = 1.1 > 1.
  CHECK_FALSE(action_feasible(s, 0, 3));
  // Interleaving itself is allowed: pickup then delivery under capacity is fine.
  auto loose = make_manual("VRPMB", {{0, 0}},
                           {cust(0.1, 0, 0.2), cust(0.2, 0, 0, 0.3), cust(0.3, 0, 0.2)});
  EnvState s2 = reset(loose, 1);
  step(s2, {2});
  CHECK(action_feasible(s2, 0, 1));
}

TEST_CASE("time windows wait on early arrival and refuse late ones") {
  auto ins = make_manual("VRPTW", {{0, 0}},
                         {cust(0.3, 0, 0.1, 0, 0.5, 0.9, 0.05), cust(0.6, 0, 0.1, 0, 0, 0.62)});
  EnvState s = reset(ins, 1);
  step(s, {1});
  // Arrived at 0.3, waited to 0.5, service 0.05.
  CHECK(s.traj[0].time == doctest::Approx(0.55));
  // Leg 0.3 from x=0.3 to x=0.6: arrival 0.85 > 0.62, masked.
  CHECK_FALSE(action_feasible(s, 0, 2));
  step(s, {0});
  // Fresh from the depot: arrival 0.6 within [0, 0.62].
  CHECK(action_feasible(s, 0, 2));
}

TEST_CASE("closed time-window routes must also fit the horizon") {
  auto ins = make_manual("VRPTW", {{0, 0}}, {cust(0.4, 0, 0.1, 0, 0, 1.0, 0.1)}, 1.0,
                         HORIZON_INF, 0.85);
  EnvState s = reset(ins, 1);
  // Arrival 0.4 + service 0.1 + return 0.4 = 0.9 > 0.85.
  CHECK_FALSE(action_feasible(s, 0, 1));
  auto open_twin = make_manual("OVRPTW", {{0, 0}}, {cust(0.4, 0, 0.1, 0, 0, 1.0, 0.1)}, 1.0,
                               HORIZON_INF, 0.85);
  EnvState so = reset(open_twin, 1);
  CHECK(action_feasible(so, 0, 1));
}

TEST_CASE("duration limit counts the return leg only for closed routes") {
  auto ins = make_manual("VRPL", {{0, 0}}, {cust(0.4, 0, 0.1), cust(0.9, 0, 0.1)}, 1.0, 1.0);
  EnvState s = reset(ins, 1);
  step(s, {1});
  // 0.4 spent; going to x=0.9 costs 0.5 plus 0.9 back: 1.8 > 1.
  CHECK_FALSE(action_feasible(s, 0, 2));
  auto open_twin = make_manual("OVRPL", {{0, 0}}, {cust(0.4, 0, 0.1), cust(0.9, 0, 0.1)}, 1.0, 1.0);
  EnvState so = reset(open_twin, 1);
  step(so, {1});
  CHECK(action_feasible(so, 0, 2));  // 0.4 + 0.5 <= 1 with no return
}

TEST_CASE("multi-depot: a depot action closes at the origin and renames it") {
  auto ins = make_manual("MDCVRP", {{0, 0}, {1, 0}, {0, 1}},
                         {cust(0.2, 0, 0.1), cust(0.9, 0, 0.1)});
  EnvState s = reset(ins, 1);
  step(s, {3});  // customer 0 from depot 0
  CHECK(action_feasible(s, 0, 1));
  step(s, {1});  // close at origin depot 0, continue from depot 1
  CHECK(s.traj[0].total_dist == doctest::Approx(0.2 + 0.2));
  CHECK(s.traj[0].start_depot == 1);
  CHECK(s.traj[0].position == 1);
  step(s, {4});  // customer 1 from depot 1: leg 0.1
  CHECK(s.traj[0].done);
  CHECK(s.traj[0].total_dist == doctest::Approx(0.4 + 0.1 + 0.1));
  CHECK(finalize_reward(ins, {0, 3, 1, 4}) == doctest::Approx(-0.6));
}

TEST_CASE("masked actions throw instead of corrupting state") {
  auto ins = make_manual("CVRP", {{0, 0}}, {cust(0.5, 0, 0.6), cust(0.1, 0, 0.6)});
  EnvState s = reset(ins, 1);
  CHECK_THROWS_AS(step(s, {0}), std::logic_error);  // fresh depot with customers available
  step(s, {1});
  CHECK_THROWS_AS(step(s, {2}), std::logic_error);  // over capacity
  std::vector<int> bad{7};
  CHECK_THROWS_AS(step(s, bad), std::invalid_argument);
}

TEST_CASE("stuck trajectories only pad at their origin") {
  auto ins = make_manual("VRPTW", {{0, 0}}, {cust(0.5, 0, 0.1, 0, 0, 0.1)});
  EnvState s = reset(ins, 1);
  // The only customer is unreachable: tl = 0.1 < leg 0.5.
  Mat<uint8_t> m = feasible_mask(s);
  CHECK(m.at(0, 0) == 1);
  CHECK(m.at(0, 1) == 0);
  step(s, {0});
  CHECK(s.traj[0].stuck);
  CHECK_FALSE(s.traj[0].done);
  CHECK(s.all_terminal());
  // Padding afterwards keeps everything frozen.
  const double before = s.traj[0].total_dist;
  step(s, {0});
  CHECK(s.traj[0].total_dist == before);
}

TEST_CASE("feasible_mask matches the independent rules on random walks") {
  Rng rng(2024);
  std::vector<std::string> names = {"CVRP", "OVRP",   "VRPB",  "VRPL",    "VRPTW",
                                    "OVRPBLTW", "VRPMB", "MDCVRP", "MDOVRPMBLTW"};
  for (const auto& name : names) {
    const VariantSpec v = variant_from_name(name);
    for (int rep = 0; rep < 6; ++rep) {
      const int n = 4 + static_cast<int>(rng.below(5));  // 4..8
      const Instance ins = generate(v, n, rng.next_u64());
      const int n_traj = std::min(3, n);
      EnvState s = reset(ins, n_traj);
      std::vector<std::vector<int>> history(n_traj);
      int guard = 0;
      while (!s.all_terminal() && guard++ < 2 * n + 4) {
        Mat<uint8_t> mask = feasible_mask(s);
        std::vector<int> actions(n_traj);
        for (int t = 0; t < n_traj; ++t) {
          const int start = ins.variant.multi_depot ? t % ins.num_depots() : 0;
          support::ReplayState r = support::replay_actions(ins, start, history[t]);
          const auto want = support::rule_mask(ins, r);
          for (int a = 0; a < ins.num_nodes(); ++a) {
            CAPTURE(name);
            CAPTURE(a);
            CHECK(static_cast<int>(mask.at(t, a)) == static_cast<int>(want[a]));
          }
          // Walk one random feasible action.
          int count = 0;
          for (int a = 0; a < ins.num_nodes(); ++a) count += mask.at(t, a);
          int pick = static_cast<int>(rng.below(count));
          for (int a = 0; a < ins.num_nodes(); ++a) {
            if (!mask.at(t, a)) continue;
            if (pick-- == 0) {
              actions[t] = a;
              break;
            }
          }
          history[t].push_back(actions[t]);
        }
        step(s, actions);
      }
      CHECK(s.all_terminal());
    }
  }
}

TEST_CASE("rewards recomputed from sequences match the incremental tracker") {
  Rng rng(77);
  for (const char* name : {"CVRP", "OVRPL", "MDVRPTW", "VRPB"}) {
    const Instance ins = generate(variant_from_name(name), 10, rng.next_u64());
    EnvState s = reset(ins, 4);
    std::vector<std::vector<int>> seqs(4);
    for (int t = 0; t < 4; ++t) seqs[t].push_back(s.traj[t].start_depot);
    {
      std::vector<int> first(4);
      for (int t = 0; t < 4; ++t) {
        first[t] = ins.node_of_customer(t);
        REQUIRE(action_feasible(s, t, first[t]));
        seqs[t].push_back(first[t]);
      }
      step(s, first);
    }
    int guard = 0;
    while (!s.all_terminal() && guard++ < 40) {
      Mat<uint8_t> mask = feasible_mask(s);
      std::vector<int> actions(4);
      for (int t = 0; t < 4; ++t) {
        const bool active = !s.traj[t].done && !s.traj[t].stuck;
        int count = 0;
        for (int a = 0; a < ins.num_nodes(); ++a) count += mask.at(t, a);
        int pick = static_cast<int>(rng.below(count));
        for (int a = 0; a < ins.num_nodes(); ++a) {
          if (!mask.at(t, a)) continue;
          if (pick-- == 0) {
            actions[t] = a;
            break;
          }
        }
        if (active) seqs[t].push_back(actions[t]);
      }
      step(s, actions);
    }
    for (int t = 0; t < 4; ++t) {
      REQUIRE(s.traj[t].done);
      CHECK(finalize_reward(ins, seqs[t]) == doctest::Approx(-s.traj[t].total_dist).epsilon(1e-12));
    }
  }
}
