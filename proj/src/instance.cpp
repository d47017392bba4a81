#include "mtvrp/instance.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "mtvrp/errors.hpp"
#include "mtvrp/rng.hpp"
#include "mtvrp/solomon.hpp"

namespace mtvrp {

Instance generate(const VariantSpec& variant, int n, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate: n must be >= 1");
  Rng rng(seed);
  Instance ins;
  ins.variant = variant;
  ins.n = n;

  const int ndep = variant.multi_depot ? 3 : 1;
  for (int d = 0; d < ndep; ++d) {
    const double x = rng.uniform(0.0, 1.0);
    const double y = rng.uniform(0.0, 1.0);
    ins.depots.push_back({x, y});
  }

  ins.customers.resize(n);
  for (auto& c : ins.customers) {
    c.x = rng.uniform(0.0, 1.0);
    c.y = rng.uniform(0.0, 1.0);
  }

  const double scale = 30.0 + static_cast<double>(n) / 5.0;
  std::vector<double> raw(n);
  for (auto& d : raw) d = static_cast<double>(rng.int_range(1, 10)) / scale;

  if (variant.backhaul) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order.begin(), order.end());
    const int k = static_cast<int>(std::ceil(0.2 * n));
    std::vector<char> is_back(n, 0);
    for (int i = 0; i < k; ++i) is_back[order[i]] = 1;
    for (int i = 0; i < n; ++i) {
      if (is_back[i])
        ins.customers[i].db = raw[i];
      else
        ins.customers[i].dl = raw[i];
    }
  } else {
    for (int i = 0; i < n; ++i) ins.customers[i].dl = raw[i];
  }

  if (variant.time_windows) {
    for (auto& c : ins.customers) {
      c.te = rng.uniform(0.0126, 4.25);
      c.ts = rng.uniform(0.0, 0.15);
      const double width = rng.uniform(1.8, 2.0);
      c.tl = c.te + width;
    }
  }

  ins.capacity = 1.0;
  ins.duration_limit = variant.duration_limit ? 3.0 : HORIZON_INF;
  return ins;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit_instance(std::string& out, const Instance& ins) {
  out += "{\"version\":1,\"variant\":\"" + ins.variant.name() + "\",\"n\":" + std::to_string(ins.n);
  out += ",\"depots\":[";
  for (size_t d = 0; d < ins.depots.size(); ++d) {
    if (d) out += ",";
    out += "[" + fmt17(ins.depots[d][0]) + "," + fmt17(ins.depots[d][1]) + "]";
  }
  out += "],\"customers\":[";
  for (int i = 0; i < ins.n; ++i) {
    const Customer& c = ins.customers[i];
    if (i) out += ",";
    out += "{\"x\":" + fmt17(c.x) + ",\"y\":" + fmt17(c.y) + ",\"dl\":" + fmt17(c.dl) +
           ",\"db\":" + fmt17(c.db) + ",\"te\":" + fmt17(c.te) + ",\"tl\":" + fmt17(c.tl) +
           ",\"ts\":" + fmt17(c.ts) + "}";
  }
  out += "],\"capacity\":" + fmt17(ins.capacity);
  out += ",\"duration_limit\":" + fmt17(ins.duration_limit);
  out += ",\"horizon\":" + fmt17(ins.horizon) + "}";
}

Instance parse_instance(const nlohmann::json& j) {
  Instance ins;
  ins.variant = variant_from_name(j.at("variant").get<std::string>());
  ins.n = j.at("n").get<int>();
  for (const auto& d : j.at("depots")) ins.depots.push_back({d.at(0).get<double>(), d.at(1).get<double>()});
  for (const auto& c : j.at("customers")) {
    Customer cu;
    cu.x = c.at("x").get<double>();
    cu.y = c.at("y").get<double>();
    cu.dl = c.at("dl").get<double>();
    cu.db = c.at("db").get<double>();
    cu.te = c.at("te").get<double>();
    cu.tl = c.at("tl").get<double>();
    cu.ts = c.at("ts").get<double>();
    ins.customers.push_back(cu);
  }
  if (static_cast<int>(ins.customers.size()) != ins.n)
    throw ParseError("instance: n=" + std::to_string(ins.n) + " but " +
                     std::to_string(ins.customers.size()) + " customers");
  if (ins.depots.empty()) throw ParseError("instance: no depots");
  ins.capacity = j.at("capacity").get<double>();
  ins.duration_limit = j.at("duration_limit").get<double>();
  ins.horizon = j.value("horizon", HORIZON_INF);
  return ins;
}

}  // namespace

std::string to_json(const Instance& ins) {
  std::string out;
  emit_instance(out, ins);
  return out;
}

Instance instance_from_json(const std::string& text) {
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    return parse_instance(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("instance json: ") + e.what());
  }
}

std::vector<Instance> load_instances(const std::string& path) {
  if (path.size() > 4 && path.substr(path.size() - 4) == ".txt") return {parse_solomon_file(path)};
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::vector<Instance> out;
  try {
    nlohmann::json j = nlohmann::json::parse(ss.str());
    if (j.is_array())
      for (const auto& e : j) out.push_back(parse_instance(e));
    else
      out.push_back(parse_instance(j));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return out;
}

void save_instances(const std::vector<Instance>& list, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  std::string text;
  if (list.size() == 1) {
    emit_instance(text, list[0]);
  } else {
    text += "[";
    for (size_t i = 0; i < list.size(); ++i) {
      if (i) text += ",\n";
      emit_instance(text, list[i]);
    }
    text += "]";
  }
  out << text << "\n";
}

}  // namespace mtvrp
