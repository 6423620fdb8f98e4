#pragma once

#include "cirforge/models/model_spec.hpp"
#include "cirforge/nn/network.hpp"

namespace cirforge::models {

class StageOrderError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Auto-encoder baseline. Stage 1 trains encoder + decoder on CIR vectors;
// stage 2 trains pos2code to regress the frozen codes. Prediction is
// decoder(pos2code(position)). All three networks share one ParamStore.
class AePipeline : public nn::Model {
 public:
  explicit AePipeline(const ModelSpec& spec);

  std::string variant() const override { return "ae_pipeline"; }
  std::size_t input_width() const override { return 3; }
  std::size_t output_width() const override { return spec_.q_out; }
  // Full position -> CIR chain. Gradients reach pos2code and the decoder.
  void forward(std::span<const double> x, std::span<double> y, nn::Tape& tape) const override;
  void backward(std::span<const double> x, nn::Tape& tape, std::span<const double> dy, std::span<double> grad,
                std::span<double> dx) const override;

  void initialize(std::uint64_t seed);

  // Stage 1: cir -> code -> cir.
  void autoencoder_forward(std::span<const double> cir, std::span<double> y, nn::Tape& tape) const;
  void autoencoder_backward(std::span<const double> cir, nn::Tape& tape, std::span<const double> dy,
                            std::span<double> grad) const;
  std::vector<double> encode(std::span<const double> cir) const;
  std::vector<double> decode(std::span<const double> code) const;

  // Stage 2: position -> code. Throws StageOrderError before stage 1 is complete.
  void code_forward(std::span<const double> x, std::span<double> code, nn::Tape& tape) const;
  void code_backward(std::span<const double> x, nn::Tape& tape, std::span<const double> dcode,
                     std::span<double> grad) const;

  void mark_stage1_complete() { stage1_complete_ = true; }
  bool stage1_complete() const { return stage1_complete_; }

  const nn::Mlp& encoder() const { return encoder_; }
  const nn::Mlp& decoder() const { return decoder_; }
  const nn::Mlp& pos2code() const { return pos2code_; }
  const ModelSpec& spec() const { return spec_; }

 private:
  ModelSpec spec_;
  nn::InputMap input_map_;
  nn::Mlp encoder_;
  nn::Mlp decoder_;
  nn::Mlp pos2code_;
  bool stage1_complete_ = false;
};

}  // namespace cirforge::models
