#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "cirforge/nn/param_store.hpp"
#include "cirforge/util/rng.hpp"

namespace cirforge::nn {

enum class Activation { identity, sine, tanh, sigmoid };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

// Optional instrumentation: multiplications of the layer products and
// nonlinearity evaluations (kernels count as one activation each).
struct OpCounter {
  std::uint64_t multiplications = 0;
  std::uint64_t activations = 0;
};

// y = act(W x + b), W is (out x in) row-major. For sine, act(z) = sin(omega0 z).
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation activation = Activation::identity;
  double omega0 = 30.0;
  std::size_t w_offset = 0;  // into the owning ParamStore
  std::size_t b_offset = 0;

  static DenseLayer create(ParamStore& store, const std::string& name, std::size_t in, std::size_t out,
                           Activation activation, double omega0 = 30.0);

  std::size_t parameter_count() const { return out * in + out; }

  // z receives the pre-activation W x + b, y the activation.
  void forward(const double* params, std::span<const double> x, std::span<double> z, std::span<double> y,
               OpCounter* counter = nullptr) const;

  // Accumulates dW, db into grad (same layout as params) and, when dx is
  // non-empty, writes dL/dx. dz is scratch of length out.
  void backward(const double* params, std::span<const double> x, std::span<const double> z,
                std::span<const double> y, std::span<const double> dy, double* grad, std::span<double> dx,
                std::span<double> dz) const;
};

// Sine-layer initialization: first layer W ~ U[-1/fan_in, 1/fan_in]; other
// layers W ~ U[-sqrt(6/fan_in)/omega0, +...]; biases in the latter range.
void siren_init(const DenseLayer& layer, double* params, bool is_first, double omega0, Rng& rng);
double siren_bound(std::size_t fan_in, bool is_first, double omega0);

// Glorot-uniform weights, zero biases (tanh / sigmoid layers).
void xavier_init(const DenseLayer& layer, double* params, Rng& rng);

// W, b ~ U[-1/sqrt(fan_in), 1/sqrt(fan_in)] (linear read-out layers).
void linear_init(const DenseLayer& layer, double* params, Rng& rng);

}  // namespace cirforge::nn
