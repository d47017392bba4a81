#include "mtvrp/validate.hpp"

#include <cmath>

namespace mtvrp {

std::string ValidationReport::str() const {
  if (ok) return "valid";
  std::string s;
  for (const auto& v : violations) {
    if (!s.empty()) s += "; ";
    s += v.rule;
    if (v.index >= 0) s += " (at " + std::to_string(v.index) + ")";
  }
  return s;
}

ValidationReport validate_solution(const Instance& ins, const std::vector<int>& seq) {
  ValidationReport rep;
  auto flag = [&](const std::string& rule, int idx) {
    rep.ok = false;
    rep.violations.push_back({rule, idx});
  };

  if (seq.empty() || !ins.is_depot(seq[0])) {
    flag("sequence must start at a depot", 0);
    return rep;
  }
  for (size_t i = 0; i < seq.size(); ++i)
    if (seq[i] < 0 || seq[i] >= ins.num_nodes()) {
      flag("node id out of range", static_cast<int>(i));
      return rep;
    }

  std::vector<int> visits(ins.n, 0);
  for (size_t i = 1; i < seq.size(); ++i)
    if (!ins.is_depot(seq[i])) {
      if (++visits[ins.customer_of(seq[i])] > 1)
        flag("customer visited more than once", static_cast<int>(i));
    }
  for (int c = 0; c < ins.n; ++c)
    if (visits[c] == 0) flag("customer " + std::to_string(c) + " unvisited", -1);

  const VariantSpec& v = ins.variant;
  const auto euclid = [&](int a, int b) { return ins.dist(a, b); };

  int origin = seq[0];
  int pos = seq[0];
  double delivered = 0, collected = 0, time = 0, length = 0;
  int served = 0;
  bool saw_backhaul = false;

  auto close_subroute = [&](int end_index) {
    if (served == 0) {
      flag("empty sub-route", end_index);
      return;
    }
    if (!v.open) {
      const double back = euclid(pos, origin);
      length += back;
      time += back;
      if (v.time_windows && time > ins.horizon) flag("depot horizon missed", end_index);
      if (v.duration_limit && length > ins.duration_limit)
        flag("duration limit exceeded", end_index);
    } else {
      if (v.duration_limit && length > ins.duration_limit)
        flag("duration limit exceeded", end_index);
    }
  };

  for (size_t i = 1; i < seq.size(); ++i) {
    const int node = seq[i];
    if (ins.is_depot(node)) {
      close_subroute(static_cast<int>(i));
      origin = node;
      pos = node;
      delivered = collected = time = length = 0;
      served = 0;
      saw_backhaul = false;
      continue;
    }
    const Customer& cu = ins.customers[ins.customer_of(node)];
    const double leg = euclid(pos, node);
    length += leg;
    const double arrival = std::max(time + leg, cu.te);
    if (v.time_windows && arrival > cu.tl) flag("time window missed", static_cast<int>(i));
    time = arrival + cu.ts;

    if (cu.dl > 0 && saw_backhaul && v.backhaul && !v.mixed_backhaul)
      flag("delivery after pickup in sub-route", static_cast<int>(i));
    if (cu.db > 0) saw_backhaul = true;

    delivered += cu.dl;
    collected += cu.db;
    if (v.mixed_backhaul) {
      if (delivered + collected > ins.capacity) flag("capacity exceeded", static_cast<int>(i));
    } else {
      if (delivered > ins.capacity) flag("capacity exceeded", static_cast<int>(i));
      if (collected > ins.capacity) flag("pickup capacity exceeded", static_cast<int>(i));
    }
    ++served;
    pos = node;
  }
  if (!ins.is_depot(pos)) close_subroute(static_cast<int>(seq.size()) - 1);
  return rep;
}

}  // namespace mtvrp
