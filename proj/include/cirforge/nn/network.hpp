#pragma once

#include <deque>
#include <span>
#include <string>
#include <vector>

#include "cirforge/nn/dense.hpp"
#include "cirforge/nn/param_store.hpp"

namespace cirforge::nn {

// Per-call activations of one Mlp, reused across calls.
struct MlpTape {
  std::vector<std::vector<double>> z;  // pre-activations per layer
  std::vector<std::vector<double>> y;  // activations per layer
  std::vector<double> dz;
  std::vector<double> grad_a, grad_b;  // ping-pong buffers for dL/dy
};

// Scratch owned by one caller (one per worker). Models index into it by
// component; the layout is private to each model. Deques keep references to
// earlier slots valid while later ones are added.
struct Tape {
  std::deque<MlpTape> mlps;
  std::deque<std::vector<double>> buffers;
  OpCounter* counter = nullptr;

  MlpTape& mlp(std::size_t i) {
    if (mlps.size() <= i) mlps.resize(i + 1);
    return mlps[i];
  }
  std::vector<double>& buffer(std::size_t i, std::size_t size) {
    if (buffers.size() <= i) buffers.resize(i + 1);
    buffers[i].resize(size);
    return buffers[i];
  }
};

// widths = {in, h1, ..., out}. Hidden layers use `hidden`, the last layer `output`.
class Mlp {
 public:
  static Mlp create(ParamStore& store, const std::string& name, const std::vector<std::size_t>& widths,
                    Activation hidden, Activation output, double omega0 = 30.0, double first_omega0 = 0.0);

  std::size_t input_width() const { return layers_.front().in; }
  std::size_t output_width() const { return layers_.back().out; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::size_t parameter_count() const;

  // Returns a view of the output held by the tape.
  std::span<const double> forward(const double* params, std::span<const double> x, MlpTape& tape,
                                  OpCounter* counter = nullptr) const;
  // Requires the tape of a forward call on the same x. dx may be empty.
  void backward(const double* params, std::span<const double> x, MlpTape& tape, std::span<const double> dy,
                double* grad, std::span<double> dx) const;

  // Sine layers get siren_init (first layer with the first-layer rule), other
  // hidden layers xavier_init, an identity output layer linear_init unless
  // the hidden activation is sine (then the hidden SIREN range).
  void initialize(double* params, Rng& rng) const;

 private:
  std::vector<DenseLayer> layers_;
};

// Fixed (non-trainable) per-coordinate affine map applied to model inputs:
// x' = (x - center) * inv_scale.
struct InputMap {
  std::vector<double> center;
  std::vector<double> inv_scale;

  bool empty() const { return center.empty(); }
  void apply(std::span<const double> x, std::span<double> out) const;
};

class Model {
 public:
  virtual ~Model() = default;

  virtual std::string variant() const = 0;
  virtual std::size_t input_width() const = 0;
  virtual std::size_t output_width() const = 0;

  virtual void forward(std::span<const double> x, std::span<double> y, Tape& tape) const = 0;
  // Accumulates dL/dparams into grad (length params().size()). Writes dL/dx
  // into dx when non-empty. Requires the tape of a forward call on x.
  virtual void backward(std::span<const double> x, Tape& tape, std::span<const double> dy, std::span<double> grad,
                        std::span<double> dx) const = 0;
  // Projection onto the feasible set after an optimizer step.
  virtual void project() {}

  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  std::vector<double> predict(std::span<const double> x) const;

 protected:
  ParamStore params_;
};

// A single Mlp behind an optional input map: SIREN, tanh/sigmoid MLPs and the
// channel mapper.
class MlpModel : public Model {
 public:
  MlpModel(std::string variant, const std::vector<std::size_t>& widths, Activation hidden, Activation output,
           double omega0, double first_omega0 = 0.0, InputMap input_map = {});

  std::string variant() const override { return variant_; }
  std::size_t input_width() const override { return mlp_.input_width(); }
  std::size_t output_width() const override { return mlp_.output_width(); }
  void forward(std::span<const double> x, std::span<double> y, Tape& tape) const override;
  void backward(std::span<const double> x, Tape& tape, std::span<const double> dy, std::span<double> grad,
                std::span<double> dx) const override;

  const Mlp& mlp() const { return mlp_; }
  void initialize(Rng& rng) { mlp_.initialize(params_.data(), rng); }

 private:
  std::string variant_;
  Mlp mlp_;
  InputMap input_map_;
};

}  // namespace cirforge::nn
