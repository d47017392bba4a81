#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mtvrp/autodiff.hpp"
#include "mtvrp/errors.hpp"
#include "mtvrp/model_config.hpp"

namespace mtvrp {

// Named-tensor archive: magic, a JSON manifest describing the architecture
// and tensor shapes, then the raw float32 little-endian payloads in manifest
// order. Loading validates names and shapes against a freshly registered
// parameter store so a mismatched file fails loudly instead of silently.
struct CheckpointData {
  ModelConfig cfg;
  std::vector<std::pair<std::string, Mat<float>>> tensors;
};

void write_checkpoint_file(const std::string& path, const CheckpointData& data);
CheckpointData read_checkpoint_file(const std::string& path);

template <class T>
void save_checkpoint(const std::string& path, const ModelConfig& cfg,
                     const ad::ParamStore<T>& params) {
  CheckpointData data;
  data.cfg = cfg;
  data.tensors.reserve(params.entries.size());
  for (const auto& e : params.entries) {
    Mat<float> m(e.value.rows, e.value.cols);
    for (size_t i = 0; i < e.value.a.size(); ++i) m.a[i] = static_cast<float>(e.value.a[i]);
    data.tensors.emplace_back(e.name, std::move(m));
  }
  write_checkpoint_file(path, data);
}

template <class T>
void load_into(const CheckpointData& data, ad::ParamStore<T>& params) {
  if (data.tensors.size() != params.entries.size())
    throw ParseError("checkpoint holds " + std::to_string(data.tensors.size()) +
                     " tensors, model expects " + std::to_string(params.entries.size()));
  for (size_t i = 0; i < data.tensors.size(); ++i) {
    const auto& [name, m] = data.tensors[i];
    auto& e = params.entries[i];
    if (name != e.name) throw ParseError("checkpoint tensor '" + name + "' where '" + e.name + "' expected");
    if (m.rows != e.value.rows || m.cols != e.value.cols)
      throw ParseError("checkpoint tensor '" + name + "' has shape " + std::to_string(m.rows) +
                       "x" + std::to_string(m.cols) + ", expected " + std::to_string(e.value.rows) +
                       "x" + std::to_string(e.value.cols));
    for (size_t k = 0; k < m.a.size(); ++k) e.value.a[k] = static_cast<T>(m.a[k]);
  }
}

template <class T>
std::pair<ModelConfig, ad::ParamStore<T>> load_policy_checkpoint(const std::string& path);

}  // namespace mtvrp
