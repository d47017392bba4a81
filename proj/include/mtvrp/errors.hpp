#pragma once

#include <stdexcept>
#include <string>

namespace mtvrp {

// Malformed input file. what() includes a 1-based line number when known.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite value produced where a finite one is required. Mapped to exit
// code 3 by the command-line tool.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mtvrp
