#include "cirforge/nn/adam.hpp"

#include <cmath>

#include <fmt/format.h>

#include "cirforge/simd/kernels.hpp"

namespace cirforge::nn {

void adam_step(AdamState& state, ParamStore& params, std::span<const double> grads) {
  const std::size_t n = params.size();
  if (grads.size() != n || state.m.size() != n || state.v.size() != n) throw NnError("adam_step: shape mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(grads[i])) {
      const TensorInfo& t = params.owner(i);
      throw NnError(fmt::format("non-finite gradient {} in parameter '{}' (element {})", grads[i], t.name,
                                i - t.offset));
    }
  }
  ++state.step;
  const AdamConfig& c = state.config;
  simd::AdamCoeffs coeffs;
  coeffs.lr = c.lr;
  coeffs.beta1 = c.beta1;
  coeffs.beta2 = c.beta2;
  coeffs.epsilon = c.epsilon;
  coeffs.bias_correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  coeffs.bias_correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  simd::active().adam_update(params.data(), state.m.data(), state.v.data(), grads.data(), n, coeffs);
}

}  // namespace cirforge::nn
