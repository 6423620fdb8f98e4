#include "cirforge/models/complexity.hpp"

#include <vector>

namespace cirforge::models {

Complexity complexity_count(const ModelSpec& spec) {
  if (!is_cgrbf(spec.variant)) throw SpecError("complexity_count applies to C-GRBF specs only");
  spec.validate();
  const auto& n = spec.hidden_widths;
  Complexity c;
  c.multiplications = 3 * n.front();
  for (std::size_t k = 0; k + 1 < n.size(); ++k) c.multiplications += n[k] * n[k + 1];
  c.multiplications += spec.q_out * spec.n_kernels;
  if (spec.residual_front && spec.front_scale_m != 1.0) c.multiplications += n.back();

  const bool hidden_linear = nn::activation_from_string(spec.hidden_activation) == nn::Activation::identity;
  const bool last_linear = nn::activation_from_string(spec.front_output) == nn::Activation::identity;
  for (std::size_t k = 0; k < n.size(); ++k) {
    const bool last = k + 1 == n.size();
    if (!(last ? last_linear : hidden_linear)) c.activations += n[k];
  }
  c.activations += spec.n_kernels;
  return c;
}

Complexity instrumented_count(const nn::Model& model) {
  nn::OpCounter counter;
  nn::Tape tape;
  tape.counter = &counter;
  std::vector<double> x(model.input_width(), 0.25);
  std::vector<double> y(model.output_width());
  model.forward(x, y, tape);
  return {counter.multiplications, counter.activations};
}

}  // namespace cirforge::models
