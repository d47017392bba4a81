#include "mtvrp/variant.hpp"

#include "mtvrp/errors.hpp"

namespace mtvrp {

std::string VariantSpec::name() const {
  std::string s;
  if (multi_depot) s += "MD";
  if (open) s += "O";
  const bool bare = !open && !duration_limit && !backhaul && !time_windows;
  s += bare ? "CVRP" : "VRP";
  if (backhaul) s += mixed_backhaul ? "MB" : "B";
  if (duration_limit) s += "L";
  if (time_windows) s += "TW";
  return s;
}

VariantSpec variant_from_name(const std::string& name) {
  VariantSpec v;
  size_t p = 0;
  auto eat = [&](const char* tok) {
    size_t n = std::string_view(tok).size();
    if (name.compare(p, n, tok) == 0) {
      p += n;
      return true;
    }
    return false;
  };
  if (eat("MD")) v.multi_depot = true;
  if (eat("O")) v.open = true;
  eat("C");
  if (!eat("VRP"))
    throw ParseError("variant '" + name + "': expected VRP at '" + name.substr(p) + "'");
  if (eat("MB")) {
    v.backhaul = true;
    v.mixed_backhaul = true;
  } else if (eat("B")) {
    v.backhaul = true;
  }
  if (eat("L")) v.duration_limit = true;
  if (eat("TW")) v.time_windows = true;
  if (p != name.size())
    throw ParseError("variant '" + name + "': unknown fragment '" + name.substr(p) + "'");
  return v;
}

const std::vector<VariantSpec>& in16() {
  static const std::vector<VariantSpec> cat = [] {
    std::vector<VariantSpec> out;
    for (int o = 0; o < 2; ++o)
      for (int b = 0; b < 2; ++b)
        for (int l = 0; l < 2; ++l)
          for (int t = 0; t < 2; ++t) {
            VariantSpec v;
            v.open = o;
            v.backhaul = b;
            v.duration_limit = l;
            v.time_windows = t;
            out.push_back(v);
          }
    return out;
  }();
  return cat;
}

const std::vector<VariantSpec>& all48() {
  static const std::vector<VariantSpec> cat = [] {
    std::vector<VariantSpec> out = in16();
    for (VariantSpec v : in16()) {
      v.multi_depot = true;
      out.push_back(v);
    }
    for (int md = 0; md < 2; ++md)
      for (const VariantSpec& base : in16()) {
        if (!base.backhaul) continue;
        VariantSpec v = base;
        v.mixed_backhaul = true;
        v.multi_depot = md;
        out.push_back(v);
      }
    return out;
  }();
  return cat;
}

}  // namespace mtvrp
