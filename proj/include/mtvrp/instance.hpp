#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mtvrp/variant.hpp"

namespace mtvrp {

// Stand-in horizon/limit for constraints a variant does not impose. Large
// enough that the corresponding feasibility rules never bind.
inline constexpr double HORIZON_INF = 1e6;

struct Customer {
  double x = 0, y = 0;
  double dl = 0;  // linehaul (delivery) demand
  double db = 0;  // backhaul (pickup) demand
  double te = 0;  // earliest service start
  double tl = HORIZON_INF;  // latest service start
  double ts = 0;  // service duration
};

// Node indexing convention used across the project: depots occupy indices
// [0, depots.size()), customers follow at depots.size() + i.
struct Instance {
  VariantSpec variant;
  int n = 0;
  std::vector<std::array<double, 2>> depots;
  std::vector<Customer> customers;
  double capacity = 1.0;
  double duration_limit = HORIZON_INF;
  double horizon = HORIZON_INF;  // latest depot return (real-world files only)

  int num_depots() const { return static_cast<int>(depots.size()); }
  int num_nodes() const { return num_depots() + n; }
  bool is_depot(int node) const { return node < num_depots(); }
  int customer_of(int node) const { return node - num_depots(); }
  int node_of_customer(int c) const { return num_depots() + c; }

  double node_x(int v) const { return is_depot(v) ? depots[v][0] : customers[customer_of(v)].x; }
  double node_y(int v) const { return is_depot(v) ? depots[v][1] : customers[customer_of(v)].y; }

  double dist(int u, int v) const {
    const double dx = node_x(u) - node_x(v);
    const double dy = node_y(u) - node_y(v);
    return std::sqrt(dx * dx + dy * dy);
  }
};

// Draws an instance of the given variant. Identical (variant, n, seed)
// triples produce bit-identical instances.
Instance generate(const VariantSpec& variant, int n, uint64_t seed);

// JSON serialization. Floats are written with 17 significant digits so the
// text round-trips the exact binary values.
std::string to_json(const Instance& ins);
Instance instance_from_json(const std::string& text);

// Loads a file holding either one instance object or an array of them.
// Files ending in .txt are parsed as Solomon-format VRPTW instances.
std::vector<Instance> load_instances(const std::string& path);
void save_instances(const std::vector<Instance>& list, const std::string& path);

}  // namespace mtvrp
