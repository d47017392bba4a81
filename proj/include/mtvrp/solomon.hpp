#pragma once

#include <string>

#include "mtvrp/instance.hpp"

namespace mtvrp {

// Parses a Solomon-format VRPTW file (VEHICLE and CUSTOMER sections, customer
// 0 being the depot). Coordinates are divided by 100, all times by the depot
// due date, and demands by the vehicle capacity, so the result lives in the
// same unit system as generated instances. The depot due date becomes
// horizon = 1. Throws ParseError with a 1-based line number on bad input.
Instance parse_solomon(const std::string& text);
Instance parse_solomon_file(const std::string& path);

}  // namespace mtvrp
