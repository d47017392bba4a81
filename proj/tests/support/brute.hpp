// Exhaustive reference for small single-depot instances: every customer
// permutation with every way of splitting it into sub-routes, judged by the
// independent rules in checkers.hpp.
#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "checkers.hpp"

namespace support {

struct BruteResult {
  double best = std::numeric_limits<double>::infinity();
  double worst = -std::numeric_limits<double>::infinity();
  std::vector<int> best_sequence;  // origin depot first
  long feasible_count = 0;
};

// Feasibility and length of one explicit visit sequence (without leading
// depot), split points marking a depot return before those positions.
inline bool brute_check(const mtvrp::Instance& ins, const std::vector<int>& perm,
                        unsigned splits, double* length_out,
                        std::vector<int>* seq_out = nullptr) {
  std::vector<int> actions;
  actions.reserve(perm.size() * 2);
  for (size_t i = 0; i < perm.size(); ++i) {
    if (i > 0 && (splits >> (i - 1)) & 1u) actions.push_back(0);  // depot node id 0
    actions.push_back(ins.node_of_customer(perm[i]));
  }
  // Replaying step by step keeps the prefix rule check honest: an action must
  // be allowed in the state reached so far.
  for (size_t i = 0; i < actions.size(); ++i) {
    std::vector<int> prefix(actions.begin(), actions.begin() + i);
    ReplayState r = replay_actions(ins, 0, prefix);
    if (!rule_action_ok(ins, r, actions[i])) return false;
  }
  ReplayState full = replay_actions(ins, 0, actions);
  if (!full.finished) return false;
  *length_out = full.total_dist;
  if (seq_out) {
    seq_out->assign(1, 0);
    seq_out->insert(seq_out->end(), actions.begin(), actions.end());
  }
  return true;
}

inline BruteResult brute_force(const mtvrp::Instance& ins) {
  BruteResult res;
  std::vector<int> perm(ins.n);
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end());
  do {
    const unsigned max_split = ins.n >= 1 ? 1u << (ins.n - 1) : 1u;
    for (unsigned splits = 0; splits < max_split; ++splits) {
      double len;
      std::vector<int> seq;
      if (!brute_check(ins, perm, splits, &len, &seq)) continue;
      ++res.feasible_count;
      if (len < res.best) {
        res.best = len;
        res.best_sequence = seq;
      }
      res.worst = std::max(res.worst, len);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return res;
}

}  // namespace support
