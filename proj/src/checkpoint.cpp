#include "mtvrp/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "mtvrp/errors.hpp"
#include "mtvrp/policy.hpp"

namespace mtvrp {

namespace {

constexpr char kMagic[8] = {'M', 'T', 'V', 'R', 'P', 'C', 'K', '1'};

void put_u64(std::ostream& os, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw ParseError("checkpoint truncated");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

// Payloads are float32 little endian regardless of host order.
void put_f32(std::ostream& os, const float* p, size_t n) {
  static_assert(sizeof(float) == 4);
  for (size_t i = 0; i < n; ++i) {
    uint32_t u;
    std::memcpy(&u, &p[i], 4);
    unsigned char b[4] = {static_cast<unsigned char>(u & 0xff),
                          static_cast<unsigned char>((u >> 8) & 0xff),
                          static_cast<unsigned char>((u >> 16) & 0xff),
                          static_cast<unsigned char>((u >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
  }
}

void get_f32(std::istream& is, float* p, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw ParseError("checkpoint payload truncated");
    uint32_t u = static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
                 (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
    std::memcpy(&p[i], &u, 4);
  }
}

}  // namespace

void write_checkpoint_file(const std::string& path, const CheckpointData& data) {
  nlohmann::json manifest;
  manifest["dim"] = data.cfg.dim;
  manifest["heads"] = data.cfg.heads;
  manifest["hidden"] = data.cfg.hidden;
  manifest["layers"] = data.cfg.layers;
  manifest["single_branch"] = data.cfg.single_branch;
  manifest["sparse_topk"] = data.cfg.sparse_topk;
  manifest["logit_clip"] = data.cfg.logit_clip;
  manifest["feature_time_cap"] = data.cfg.feature_time_cap;
  auto& tensors = manifest["tensors"] = nlohmann::json::array();
  for (const auto& [name, m] : data.tensors)
    tensors.push_back({{"name", name}, {"rows", m.rows}, {"cols", m.cols}});
  const std::string text = manifest.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParseError("cannot open '" + path + "' for writing");
  os.write(kMagic, 8);
  put_u64(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, m] : data.tensors) put_f32(os, m.a.data(), m.a.size());
  if (!os) throw ParseError("short write to '" + path + "'");
}

CheckpointData read_checkpoint_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open '" + path + "'");
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) throw ParseError("'" + path + "' is not a checkpoint");
  const uint64_t len = get_u64(is);
  if (len > (1u << 26)) throw ParseError("checkpoint manifest implausibly large");
  std::string text(len, '\0');
  is.read(text.data(), static_cast<std::streamsize>(len));
  if (!is) throw ParseError("checkpoint manifest truncated");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint manifest: ") + e.what());
  }
  CheckpointData data;
  data.cfg.dim = manifest.at("dim").get<int>();
  data.cfg.heads = manifest.at("heads").get<int>();
  data.cfg.hidden = manifest.at("hidden").get<int>();
  data.cfg.layers = manifest.at("layers").get<int>();
  data.cfg.single_branch = manifest.value("single_branch", false);
  data.cfg.sparse_topk = manifest.value("sparse_topk", 0);
  data.cfg.logit_clip = manifest.value("logit_clip", 10.0);
  data.cfg.feature_time_cap = manifest.value("feature_time_cap", 10.0);
  for (const auto& t : manifest.at("tensors")) {
    const int rows = t.at("rows").get<int>();
    const int cols = t.at("cols").get<int>();
    if (rows <= 0 || cols <= 0) throw ParseError("checkpoint tensor with non-positive shape");
    Mat<float> m(rows, cols);
    get_f32(is, m.a.data(), m.a.size());
    data.tensors.emplace_back(t.at("name").get<std::string>(), std::move(m));
  }
  return data;
}

template <class T>
std::pair<ModelConfig, ad::ParamStore<T>> load_policy_checkpoint(const std::string& path) {
  CheckpointData data = read_checkpoint_file(path);
  ad::ParamStore<T> params;
  register_policy_params(params, data.cfg);
  load_into(data, params);
  return {data.cfg, std::move(params)};
}

template std::pair<ModelConfig, ad::ParamStore<float>> load_policy_checkpoint<float>(const std::string&);
template std::pair<ModelConfig, ad::ParamStore<double>> load_policy_checkpoint<double>(const std::string&);

}  // namespace mtvrp
