#include "cirforge/nn/network.hpp"

#include <algorithm>

namespace cirforge::nn {

Mlp Mlp::create(ParamStore& store, const std::string& name, const std::vector<std::size_t>& widths,
                Activation hidden, Activation output, double omega0, double first_omega0) {
  if (widths.size() < 2) throw NnError("mlp '" + name + "' needs at least an input and an output width");
  Mlp m;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const bool last = l + 2 == widths.size();
    m.layers_.push_back(DenseLayer::create(store, name + ".l" + std::to_string(l), widths[l], widths[l + 1],
                                           last ? output : hidden,
                                           l == 0 && first_omega0 > 0.0 ? first_omega0 : omega0));
  }
  return m;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.parameter_count();
  return n;
}

std::span<const double> Mlp::forward(const double* params, std::span<const double> x, MlpTape& tape,
                                     OpCounter* counter) const {
  tape.z.resize(layers_.size());
  tape.y.resize(layers_.size());
  std::span<const double> in = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    tape.z[l].resize(layers_[l].out);
    tape.y[l].resize(layers_[l].out);
    layers_[l].forward(params, in, tape.z[l], tape.y[l], counter);
    in = tape.y[l];
  }
  return tape.y.back();
}

void Mlp::backward(const double* params, std::span<const double> x, MlpTape& tape, std::span<const double> dy,
                   double* grad, std::span<double> dx) const {
  if (tape.y.size() != layers_.size()) throw NnError("mlp backward: tape does not match this network");
  tape.grad_a.assign(dy.begin(), dy.end());
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const DenseLayer& layer = layers_[l];
    const std::span<const double> in = l == 0 ? x : std::span<const double>(tape.y[l - 1]);
    tape.dz.resize(layer.out);
    std::span<double> dx_l;
    if (l > 0) {
      tape.grad_b.resize(layer.in);
      dx_l = tape.grad_b;
    } else {
      dx_l = dx;
    }
    layer.backward(params, in, tape.z[l], tape.y[l], tape.grad_a, grad, dx_l, tape.dz);
    if (l > 0) std::swap(tape.grad_a, tape.grad_b);
  }
}

void Mlp::initialize(double* params, Rng& rng) const {
  const bool sine_net = std::any_of(layers_.begin(), layers_.end(),
                                    [](const DenseLayer& l) { return l.activation == Activation::sine; });
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    switch (layer.activation) {
      case Activation::sine:
        siren_init(layer, params, l == 0, layer.omega0, rng);
        break;
      case Activation::tanh:
      case Activation::sigmoid:
        xavier_init(layer, params, rng);
        break;
      case Activation::identity:
        if (sine_net && l > 0) {
          siren_init(layer, params, false, layer.omega0, rng);
        } else {
          linear_init(layer, params, rng);
        }
        break;
    }
  }
}

void InputMap::apply(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - center[i]) * inv_scale[i];
}

std::vector<double> Model::predict(std::span<const double> x) const {
  Tape tape;
  std::vector<double> y(output_width());
  forward(x, y, tape);
  return y;
}

MlpModel::MlpModel(std::string variant, const std::vector<std::size_t>& widths, Activation hidden,
                   Activation output, double omega0, double first_omega0, InputMap input_map)
    : variant_(std::move(variant)), input_map_(std::move(input_map)) {
  mlp_ = Mlp::create(params_, variant_, widths, hidden, output, omega0, first_omega0);
  if (!input_map_.empty() &&
      (input_map_.center.size() != widths.front() || input_map_.inv_scale.size() != widths.front())) {
    throw NnError("input map width does not match the network input");
  }
}

void MlpModel::forward(std::span<const double> x, std::span<double> y, Tape& tape) const {
  if (x.size() != input_width() || y.size() != output_width()) throw NnError(variant_ + ": shape mismatch");
  std::span<const double> in = x;
  if (!input_map_.empty()) {
    auto& buf = tape.buffer(0, x.size());
    input_map_.apply(x, buf);
    in = buf;
  }
  const auto out = mlp_.forward(params_.data(), in, tape.mlp(0), tape.counter);
  std::copy(out.begin(), out.end(), y.begin());
}

void MlpModel::backward(std::span<const double> x, Tape& tape, std::span<const double> dy, std::span<double> grad,
                        std::span<double> dx) const {
  if (grad.size() != params_.size()) throw NnError(variant_ + ": gradient buffer size mismatch");
  std::span<const double> in = x;
  if (!input_map_.empty()) in = tape.buffers.at(0);
  mlp_.backward(params_.data(), in, tape.mlp(0), dy, grad.data(), dx);
  if (!dx.empty() && !input_map_.empty()) {
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= input_map_.inv_scale[i];
  }
}

}  // namespace cirforge::nn
