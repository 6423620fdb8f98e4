#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cirforge/nn/param_store.hpp"

namespace cirforge::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;

  AdamState() = default;
  AdamState(std::size_t n, AdamConfig c) : config(c), m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update of every parameter in the store. Throws
// NnError naming the first parameter whose gradient is not finite; nothing is
// modified in that case.
void adam_step(AdamState& state, ParamStore& params, std::span<const double> grads);

}  // namespace cirforge::nn
