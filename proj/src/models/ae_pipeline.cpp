#include "cirforge/models/ae_pipeline.hpp"

#include <algorithm>

#include "cirforge/models/cgrbf.hpp"

namespace cirforge::models {

namespace {

constexpr std::size_t kEncoder = 0, kDecoder = 1, kPos2Code = 2;
constexpr std::size_t kNormX = 0, kCode = 1, kDCode = 2, kDNormX = 3;
constexpr std::uint64_t kInitStream = 0x61657069;  // "aepi"

std::vector<std::size_t> chain(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::vector<std::size_t> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

}  // namespace

AePipeline::AePipeline(const ModelSpec& spec) : spec_(spec) {
  spec_.validate();
  if (spec_.variant != Variant::ae_pipeline) throw SpecError("AePipeline needs the ae_pipeline variant");
  input_map_ = make_input_map(spec_);
  const std::size_t q = spec_.q_out;
  encoder_ = nn::Mlp::create(params_, "encoder", chain(q, spec_.encoder_widths, spec_.code_dim),
                             nn::Activation::sigmoid, nn::Activation::sigmoid);
  decoder_ = nn::Mlp::create(params_, "decoder", chain(spec_.code_dim, spec_.decoder_widths, q),
                             nn::Activation::sigmoid, nn::Activation::identity);
  pos2code_ = nn::Mlp::create(params_, "pos2code", chain(3, spec_.pos2code_widths, spec_.code_dim),
                              nn::activation_from_string(spec_.hidden_activation), nn::Activation::identity);
}

void AePipeline::initialize(std::uint64_t seed) {
  Rng rng = Rng::stream(seed, kInitStream);
  encoder_.initialize(params_.data(), rng);
  decoder_.initialize(params_.data(), rng);
  pos2code_.initialize(params_.data(), rng);
}

void AePipeline::autoencoder_forward(std::span<const double> cir, std::span<double> y, nn::Tape& tape) const {
  const double* p = params_.data();
  const auto code = encoder_.forward(p, cir, tape.mlp(kEncoder), tape.counter);
  const auto out = decoder_.forward(p, code, tape.mlp(kDecoder), tape.counter);
  std::copy(out.begin(), out.end(), y.begin());
}

void AePipeline::autoencoder_backward(std::span<const double> cir, nn::Tape& tape, std::span<const double> dy,
                                      std::span<double> grad) const {
  const double* p = params_.data();
  auto& dcode = tape.buffer(kDCode, spec_.code_dim);
  decoder_.backward(p, tape.mlp(kEncoder).y.back(), tape.mlp(kDecoder), dy, grad.data(), dcode);
  encoder_.backward(p, cir, tape.mlp(kEncoder), dcode, grad.data(), {});
}

std::vector<double> AePipeline::encode(std::span<const double> cir) const {
  nn::MlpTape t;
  const auto code = encoder_.forward(params_.data(), cir, t);
  return {code.begin(), code.end()};
}

std::vector<double> AePipeline::decode(std::span<const double> code) const {
  nn::MlpTape t;
  const auto out = decoder_.forward(params_.data(), code, t);
  return {out.begin(), out.end()};
}

void AePipeline::code_forward(std::span<const double> x, std::span<double> code, nn::Tape& tape) const {
  if (!stage1_complete_) throw StageOrderError("ae_pipeline: stage 2 (pos2code) requires a trained auto-encoder");
  std::span<const double> in = x;
  if (!input_map_.empty()) {
    auto& buf = tape.buffer(kNormX, 3);
    input_map_.apply(x, buf);
    in = buf;
  }
  const auto out = pos2code_.forward(params_.data(), in, tape.mlp(kPos2Code), tape.counter);
  std::copy(out.begin(), out.end(), code.begin());
}

void AePipeline::code_backward(std::span<const double> x, nn::Tape& tape, std::span<const double> dcode,
                               std::span<double> grad) const {
  std::span<const double> in = input_map_.empty() ? x : std::span<const double>(tape.buffers.at(kNormX));
  pos2code_.backward(params_.data(), in, tape.mlp(kPos2Code), dcode, grad.data(), {});
}

void AePipeline::forward(std::span<const double> x, std::span<double> y, nn::Tape& tape) const {
  if (x.size() != 3 || y.size() != spec_.q_out) throw nn::NnError("ae_pipeline forward: shape mismatch");
  const double* p = params_.data();
  std::span<const double> in = x;
  if (!input_map_.empty()) {
    auto& buf = tape.buffer(kNormX, 3);
    input_map_.apply(x, buf);
    in = buf;
  }
  const auto code = pos2code_.forward(p, in, tape.mlp(kPos2Code), tape.counter);
  auto& c = tape.buffer(kCode, code.size());
  std::copy(code.begin(), code.end(), c.begin());
  const auto out = decoder_.forward(p, c, tape.mlp(kDecoder), tape.counter);
  std::copy(out.begin(), out.end(), y.begin());
}

void AePipeline::backward(std::span<const double> x, nn::Tape& tape, std::span<const double> dy,
                          std::span<double> grad, std::span<double> dx) const {
  if (grad.size() != params_.size()) throw nn::NnError("ae_pipeline backward: gradient buffer size mismatch");
  const double* p = params_.data();
  auto& dcode = tape.buffer(kDCode, spec_.code_dim);
  decoder_.backward(p, tape.buffers.at(kCode), tape.mlp(kDecoder), dy, grad.data(), dcode);
  std::span<const double> in = input_map_.empty() ? x : std::span<const double>(tape.buffers.at(kNormX));
  auto& dn = tape.buffer(kDNormX, dx.empty() ? 0 : 3);
  pos2code_.backward(p, in, tape.mlp(kPos2Code), dcode, grad.data(), dn);
  if (dx.empty()) return;
  for (std::size_t i = 0; i < 3; ++i) dx[i] = input_map_.empty() ? dn[i] : dn[i] * input_map_.inv_scale[i];
}

}  // namespace cirforge::models
