#pragma once

#include <string>
#include <vector>

namespace mtvrp {

// A routing variant is a combination of constraint switches on top of the
// capacitated base problem.
struct VariantSpec {
  bool open = false;         // routes end at the last customer
  bool duration_limit = false;  // per-route length budget
  bool backhaul = false;     // some customers are pickups instead of deliveries
  bool mixed_backhaul = false;  // pickups may interleave with deliveries
  bool time_windows = false;
  bool multi_depot = false;

  bool operator==(const VariantSpec&) const = default;

  // Canonical name, e.g. CVRP, OVRPBLTW, MDVRPMBTW.
  std::string name() const;
};

// Parses names like "MDOVRPMBLTW". Throws ParseError naming the offending
// fragment. Lenient about the "C" in e.g. "MDCVRPTW".
VariantSpec variant_from_name(const std::string& name);

// The 16 combinations of {open, duration_limit, backhaul, time_windows}.
const std::vector<VariantSpec>& in16();

// in16 plus multi-depot and mixed-backhaul extensions (48 total).
const std::vector<VariantSpec>& all48();

}  // namespace mtvrp
