#pragma once

#include <cstdint>

#include "cirforge/models/model_spec.hpp"
#include "cirforge/nn/dense.hpp"
#include "cirforge/nn/network.hpp"

namespace cirforge::models {

struct Complexity {
  std::uint64_t multiplications = 0;
  std::uint64_t activations = 0;
};

// Per-position cost of a C-GRBF forward pass:
//   multiplications = 3 n_1 + sum_k n_k n_{k+1} + m * n_kernels
//   activations     = sum of nonlinear front widths + n_kernels
// With one kernel per triple and a sine front this is exactly the
// 3 n_1 + sum n_k n_{k+1} + m n_l / 3 and sum n_k + n_l / 3 counts. A
// residual front with front_scale_m != 1 adds n_l multiplications.
// Throws SpecError for non-C-GRBF specs.
Complexity complexity_count(const ModelSpec& spec);

// Runs one instrumented forward pass and returns the counted operations.
Complexity instrumented_count(const nn::Model& model);

}  // namespace cirforge::models
