#pragma once

#include <string>
#include <vector>

#include "ladr/errors.hpp"
#include "ladr/network.hpp"

namespace ladr {

struct CheckpointTensor {
  std::string name;
  std::vector<int> shape;
  std::vector<float> data;
};

// In-memory image of the on-disk format: "LADR" magic, u32 version, a JSON
// config blob, then named float32 tensors. Everything multi-byte is
// little-endian; strings are u32-length-prefixed UTF-8.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;
  std::string config_json;
  std::vector<CheckpointTensor> tensors;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);

// Throws FormatError on bad magic, unknown version, or a truncated file;
// IoError when the file cannot be read at all.
Checkpoint load_checkpoint(const std::string& path);

// Parameters first, then batch-norm running buffers, in registry order.
template <typename T>
Checkpoint snapshot_network(Network<T>& net, const std::string& config_json) {
  Checkpoint ck;
  ck.config_json = config_json;
  auto dump = [&ck](const std::vector<ParamRef<T>>& refs) {
    for (const auto& r : refs) {
      CheckpointTensor t;
      t.name = r.name;
      t.shape = r.shape;
      t.data.reserve(r.value->size());
      for (const auto v : *r.value) t.data.push_back(static_cast<float>(v));
      ck.tensors.push_back(std::move(t));
    }
  };
  dump(net.parameters());
  dump(net.buffers());
  return ck;
}

// Strict: every network tensor must be present with its exact shape, and the
// checkpoint may not carry extras. Throws FormatError otherwise.
template <typename T>
void restore_network(Network<T>& net, const Checkpoint& ck) {
  std::vector<ParamRef<T>> refs = net.parameters();
  {
    auto bufs = net.buffers();
    refs.insert(refs.end(), bufs.begin(), bufs.end());
  }
  if (refs.size() != ck.tensors.size())
    throw FormatError("checkpoint tensor count mismatch");
  for (auto& r : refs) {
    const CheckpointTensor* found = nullptr;
    for (const auto& t : ck.tensors)
      if (t.name == r.name) {
        found = &t;
        break;
      }
    if (!found) throw FormatError("checkpoint missing tensor " + r.name);
    if (found->shape != r.shape || found->data.size() != r.value->size())
      throw FormatError("checkpoint shape mismatch for " + r.name);
    for (std::size_t j = 0; j < found->data.size(); ++j)
      (*r.value)[j] = static_cast<T>(found->data[j]);
  }
}

}  // namespace ladr
