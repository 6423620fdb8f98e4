#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "cirforge/models/model_spec.hpp"
#include "cirforge/nn/checkpoint.hpp"
#include "cirforge/nn/network.hpp"

namespace cirforge::models {

// Builds and initializes the network described by spec. Deterministic in seed.
std::unique_ptr<nn::Model> build_model(const ModelSpec& spec, std::uint64_t seed);

std::size_t parameter_count(const nn::Model& model);

// Checkpoint helpers tying a model to its spec.
nn::Checkpoint checkpoint_model(const nn::Model& model, const ModelSpec& spec, const nn::AdamState* adam,
                                std::uint64_t train_step);
struct RestoredModel {
  ModelSpec spec;
  std::unique_ptr<nn::Model> model;
  nn::Checkpoint checkpoint;
};
RestoredModel restore_model(const std::string& checkpoint_path);

}  // namespace cirforge::models
