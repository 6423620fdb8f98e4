#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cirforge/nn/adam.hpp"
#include "cirforge/nn/param_store.hpp"

namespace cirforge::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> data;
};

struct Checkpoint {
  std::string spec_json;  // model description used to rebuild the network
  std::uint64_t spec_digest = 0;
  std::uint64_t train_step = 0;
  std::vector<NamedTensor> tensors;
  std::optional<AdamState> adam;
};

Checkpoint make_checkpoint(const ParamStore& params, const std::string& spec_json, std::uint64_t spec_digest,
                           const AdamState* adam, std::uint64_t train_step);

// Copies tensors into a store with identical names and shapes; throws NnError otherwise.
void restore_params(const Checkpoint& ckpt, ParamStore& params);

// Layout: magic "CIRCKPT\0", u32 version, spec digest, spec text, tensors
// (name, shape, values), optional Adam state, u64 FNV-1a trailer.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace cirforge::nn
