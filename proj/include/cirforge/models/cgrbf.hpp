#pragma once

#include "cirforge/models/model_spec.hpp"
#include "cirforge/nn/cg_kernel.hpp"
#include "cirforge/nn/network.hpp"

namespace cirforge::models {

// The spec's fixed input normalization (empty when the spec has none).
nn::InputMap make_input_map(const ModelSpec& spec);

// position -> front network -> n_l / 3 coordinate triples -> Cosine-Gaussian
// kernels -> linear combiner -> CIR vector.
class CgrbfModel : public nn::Model {
 public:
  explicit CgrbfModel(const ModelSpec& spec);

  std::string variant() const override { return to_string(spec_.variant); }
  std::size_t input_width() const override { return 3; }
  std::size_t output_width() const override { return spec_.q_out; }
  void forward(std::span<const double> x, std::span<double> y, nn::Tape& tape) const override;
  void backward(std::span<const double> x, nn::Tape& tape, std::span<const double> dy, std::span<double> grad,
                std::span<double> dx) const override;
  void project() override;

  void initialize(std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  const nn::Mlp& front() const { return front_; }
  const nn::CgKernelLayer& kernels() const { return kernels_; }
  const nn::Mlp& out_linear() const { return out_; }

  // Kernel outputs of the last forward call on this tape.
  static std::span<const double> kernel_outputs(const nn::Tape& tape);
  // Coordinate triples of the last forward call on this tape.
  static std::span<const double> triples(const nn::Tape& tape);

 private:
  ModelSpec spec_;
  nn::InputMap input_map_;
  nn::Mlp front_;
  nn::CgKernelLayer kernels_;
  nn::Mlp out_;
};

}  // namespace cirforge::models
