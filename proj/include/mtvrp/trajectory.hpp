#pragma once

#include <string>
#include <vector>

namespace mtvrp {

// Decoded trajectories for one instance. Each sequence begins with the
// origin depot node followed by the visited nodes in order; depot entries
// inside a sequence separate sub-routes.
struct TrajectorySet {
  std::string instance_id;
  std::vector<int> starts;  // forced first customer per trajectory
  std::vector<std::vector<int>> sequences;
  std::vector<double> rewards;
};

std::string to_json(const TrajectorySet& t);
TrajectorySet trajectories_from_json(const std::string& text);

std::vector<TrajectorySet> load_trajectories(const std::string& path);
void save_trajectories(const std::vector<TrajectorySet>& list, const std::string& path);

}  // namespace mtvrp
