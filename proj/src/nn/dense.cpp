#include "cirforge/nn/dense.hpp"

#include <cmath>

#include "cirforge/simd/kernels.hpp"

namespace cirforge::nn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity:
      return "identity";
    case Activation::sine:
      return "sine";
    case Activation::tanh:
      return "tanh";
    case Activation::sigmoid:
      return "sigmoid";
  }
  return "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity" || s == "linear") return Activation::identity;
  if (s == "sine" || s == "sin") return Activation::sine;
  if (s == "tanh") return Activation::tanh;
  if (s == "sigmoid") return Activation::sigmoid;
  throw NnError("unknown activation '" + s + "'");
}

DenseLayer DenseLayer::create(ParamStore& store, const std::string& name, std::size_t in, std::size_t out,
                              Activation activation, double omega0) {
  if (in == 0 || out == 0) throw NnError("dense layer '" + name + "' has a zero dimension");
  if (activation == Activation::sine && !(omega0 > 0.0)) throw NnError("sine layer needs omega0 > 0");
  DenseLayer l;
  l.in = in;
  l.out = out;
  l.activation = activation;
  l.omega0 = omega0;
  l.w_offset = store.add(name + ".W", {out, in});
  l.b_offset = store.add(name + ".b", {out});
  return l;
}

void DenseLayer::forward(const double* params, std::span<const double> x, std::span<double> z, std::span<double> y,
                         OpCounter* counter) const {
  if (x.size() != in || z.size() != out || y.size() != out) throw NnError("dense forward: shape mismatch");
  simd::active().gemv(params + w_offset, out, in, x.data(), params + b_offset, z.data());
  switch (activation) {
    case Activation::identity:
      for (std::size_t i = 0; i < out; ++i) y[i] = z[i];
      break;
    case Activation::sine:
      for (std::size_t i = 0; i < out; ++i) y[i] = std::sin(omega0 * z[i]);
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < out; ++i) y[i] = std::tanh(z[i]);
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < out; ++i) y[i] = 1.0 / (1.0 + std::exp(-z[i]));
      break;
  }
  if (counter) {
    counter->multiplications += out * in;
    if (activation != Activation::identity) counter->activations += out;
  }
}

void DenseLayer::backward(const double* params, std::span<const double> x, std::span<const double> z,
                          std::span<const double> y, std::span<const double> dy, double* grad, std::span<double> dx,
                          std::span<double> dz) const {
  if (x.size() != in || z.size() != out || y.size() != out || dy.size() != out || dz.size() != out) {
    throw NnError("dense backward: shape mismatch");
  }
  switch (activation) {
    case Activation::identity:
      for (std::size_t i = 0; i < out; ++i) dz[i] = dy[i];
      break;
    case Activation::sine:
      for (std::size_t i = 0; i < out; ++i) dz[i] = dy[i] * omega0 * std::cos(omega0 * z[i]);
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < out; ++i) dz[i] = dy[i] * (1.0 - y[i] * y[i]);
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < out; ++i) dz[i] = dy[i] * y[i] * (1.0 - y[i]);
      break;
  }
  const auto& k = simd::active();
  k.ger_acc(grad + w_offset, out, in, dz.data(), x.data());
  k.axpy(1.0, dz.data(), grad + b_offset, out);
  if (!dx.empty()) {
    if (dx.size() != in) throw NnError("dense backward: dx shape mismatch");
    for (double& v : dx) v = 0.0;
    k.gemv_t_acc(params + w_offset, out, in, dz.data(), dx.data());
  }
}

double siren_bound(std::size_t fan_in, bool is_first, double omega0) {
  const double n = static_cast<double>(fan_in);
  return is_first ? 1.0 / n : std::sqrt(6.0 / n) / omega0;
}

void siren_init(const DenseLayer& layer, double* params, bool is_first, double omega0, Rng& rng) {
  const double wb = siren_bound(layer.in, is_first, omega0);
  const double bb = siren_bound(layer.in, false, omega0);
  for (std::size_t i = 0; i < layer.out * layer.in; ++i) params[layer.w_offset + i] = rng.uniform(-wb, wb);
  for (std::size_t i = 0; i < layer.out; ++i) params[layer.b_offset + i] = rng.uniform(-bb, bb);
}

void xavier_init(const DenseLayer& layer, double* params, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
  for (std::size_t i = 0; i < layer.out * layer.in; ++i) params[layer.w_offset + i] = rng.uniform(-bound, bound);
  for (std::size_t i = 0; i < layer.out; ++i) params[layer.b_offset + i] = 0.0;
}

void linear_init(const DenseLayer& layer, double* params, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
  for (std::size_t i = 0; i < layer.out * layer.in; ++i) params[layer.w_offset + i] = rng.uniform(-bound, bound);
  for (std::size_t i = 0; i < layer.out; ++i) params[layer.b_offset + i] = rng.uniform(-bound, bound);
}

}  // namespace cirforge::nn
