#include "mtvrp/trajectory.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mtvrp/errors.hpp"

namespace mtvrp {

namespace {

nlohmann::json to_json_obj(const TrajectorySet& t) {
  nlohmann::json j;
  j["instance_id"] = t.instance_id;
  j["starts"] = t.starts;
  j["sequences"] = t.sequences;
  j["rewards"] = t.rewards;
  return j;
}

TrajectorySet from_json_obj(const nlohmann::json& j) {
  TrajectorySet t;
  t.instance_id = j.at("instance_id").get<std::string>();
  t.starts = j.at("starts").get<std::vector<int>>();
  t.sequences = j.at("sequences").get<std::vector<std::vector<int>>>();
  t.rewards = j.at("rewards").get<std::vector<double>>();
  if (t.sequences.size() != t.rewards.size() || t.sequences.size() != t.starts.size())
    throw ParseError("trajectories: starts/sequences/rewards lengths differ");
  return t;
}

}  // namespace

std::string to_json(const TrajectorySet& t) { return to_json_obj(t).dump(); }

TrajectorySet trajectories_from_json(const std::string& text) {
  return from_json_obj(nlohmann::json::parse(text));
}

std::vector<TrajectorySet> load_trajectories(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j = nlohmann::json::parse(ss.str());
  std::vector<TrajectorySet> out;
  if (j.is_array())
    for (const auto& e : j) out.push_back(from_json_obj(e));
  else
    out.push_back(from_json_obj(j));
  return out;
}

void save_trajectories(const std::vector<TrajectorySet>& list, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  nlohmann::json j = nlohmann::json::array();
  for (const auto& t : list) j.push_back(to_json_obj(t));
  out << j.dump(1) << "\n";
}

}  // namespace mtvrp
