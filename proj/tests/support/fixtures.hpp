// Benchmark-format text fixtures and small file helpers for tests.
#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace support {

inline std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream os(path);
  os << text;
  os.close();
  return path.string();
}

// A file in the classic 100-customer routing benchmark layout: header with a
// fleet section, then one row per node, depot first at (35,35) with due date
// 230. Customer rows are synthesized deterministically.
inline std::string solomon_r101_text() {
  std::string s;
  s += "R101\n\nVEHICLE\nNUMBER     CAPACITY\n  25         200\n\n";
  s += "CUSTOMER\n";
  s += "CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME   DUE DATE   SERVICE   TIME\n\n";
  char row[128];
  std::snprintf(row, sizeof row, "%5d %9d %9d %9d %11d %10d %9d\n", 0, 35, 35, 0, 0, 230, 0);
  s += row;
  uint64_t x = 88172645463325252ULL;
  auto next = [&x](int m) {
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    return static_cast<int>(x % static_cast<uint64_t>(m));
  };
  for (int i = 1; i <= 100; ++i) {
    const int cx = next(71), cy = next(71);
    const int demand = 1 + next(30);
    const int ready = next(170);
    const int due = ready + 10 + next(45);
    std::snprintf(row, sizeof row, "%5d %9d %9d %9d %11d %10d %9d\n", i, cx, cy, demand, ready,
                  due, 10);
    s += row;
  }
  return s;
}

// Three customers with easy exact geometry: legs of 0.05/0.05/0.10 after
// scaling, so hand-computed route lengths are exact.
inline std::string solomon_tiny_text() {
  return "TINY3\n\n"
         "VEHICLE\n"
         "NUMBER     CAPACITY\n"
         "   5         200\n\n"
         "CUSTOMER\n"
         "CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME   DUE DATE   SERVICE   TIME\n\n"
         "    0         0         0          0           0       1000         0\n"
         "    1         3         4         10           0       1000        10\n"
         "    2         6         8         10           0       1000        10\n"
         "    3         0         5         10           0       1000        10\n";
}

}  // namespace support
