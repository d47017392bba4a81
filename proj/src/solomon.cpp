#include "mtvrp/solomon.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "mtvrp/errors.hpp"

namespace mtvrp {

namespace {

std::vector<std::string> tokens(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

bool numeric(const std::string& t) {
  char* end = nullptr;
  std::strtod(t.c_str(), &end);
  return end && *end == '\0' && end != t.c_str();
}

}  // namespace

Instance parse_solomon(const std::string& text) {
  std::vector<std::string> lines;
  {
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
  }

  double capacity = -1;
  struct Row {
    double x, y, demand, ready, due, service;
  };
  std::vector<Row> rows;

  enum class Section { none, vehicle, customer } section = Section::none;
  for (size_t i = 0; i < lines.size(); ++i) {
    auto tok = tokens(lines[i]);
    if (tok.empty()) continue;
    if (tok[0] == "VEHICLE") {
      section = Section::vehicle;
      continue;
    }
    if (tok[0] == "CUSTOMER") {
      section = Section::customer;
      continue;
    }
    if (section == Section::vehicle && tok.size() >= 2 && numeric(tok[0]) && numeric(tok[1])) {
      capacity = std::stod(tok[1]);
      if (capacity <= 0)
        throw ParseError("solomon line " + std::to_string(i + 1) + ": capacity must be positive");
      continue;
    }
    if (section == Section::customer && numeric(tok[0])) {
      if (tok.size() < 7)
        throw ParseError("solomon line " + std::to_string(i + 1) + ": expected 7 columns, got " +
                         std::to_string(tok.size()));
      for (int c = 0; c < 7; ++c)
        if (!numeric(tok[c]))
          throw ParseError("solomon line " + std::to_string(i + 1) + ": non-numeric field '" +
                           tok[c] + "'");
      rows.push_back({std::stod(tok[1]), std::stod(tok[2]), std::stod(tok[3]), std::stod(tok[4]),
                      std::stod(tok[5]), std::stod(tok[6])});
    }
  }

  if (capacity < 0) throw ParseError("solomon: missing VEHICLE capacity");
  if (rows.size() < 2) throw ParseError("solomon: need a depot row and at least one customer");

  const Row& depot = rows[0];
  if (depot.due <= 0) throw ParseError("solomon: depot due date must be positive");
  const double tscale = depot.due;

  Instance ins;
  ins.variant = variant_from_name("VRPTW");
  ins.n = static_cast<int>(rows.size()) - 1;
  ins.depots.push_back({depot.x / 100.0, depot.y / 100.0});
  for (size_t r = 1; r < rows.size(); ++r) {
    Customer c;
    c.x = rows[r].x / 100.0;
    c.y = rows[r].y / 100.0;
    c.dl = rows[r].demand / capacity;
    c.db = 0;
    c.te = rows[r].ready / tscale;
    c.tl = rows[r].due / tscale;
    c.ts = rows[r].service / tscale;
    ins.customers.push_back(c);
  }
  ins.capacity = 1.0;
  ins.duration_limit = HORIZON_INF;
  ins.horizon = 1.0;
  return ins;
}

Instance parse_solomon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_solomon(ss.str());
}

}  // namespace mtvrp
