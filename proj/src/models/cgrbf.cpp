#include "cirforge/models/cgrbf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cirforge/rt/scene.hpp"

namespace cirforge::models {

namespace {

// Tape layout.
constexpr std::size_t kFront = 0, kOut = 1;
constexpr std::size_t kNormX = 0, kTriples = 1, kPhi = 2, kDPhi = 3, kDTriples = 4, kDNormX = 5;

constexpr std::uint64_t kInitStream = 0x63677262;  // "cgrb"

}  // namespace

nn::InputMap make_input_map(const ModelSpec& spec) {
  nn::InputMap m;
  if (spec.input_center.empty()) return m;
  m.center = spec.input_center;
  for (double s : spec.input_scale) m.inv_scale.push_back(1.0 / s);
  return m;
}

CgrbfModel::CgrbfModel(const ModelSpec& spec) : spec_(spec) {
  spec_.validate();
  if (!is_cgrbf(spec_.variant)) throw SpecError("CgrbfModel needs a cgrbf variant");
  input_map_ = make_input_map(spec_);
  std::vector<std::size_t> widths{3};
  widths.insert(widths.end(), spec_.hidden_widths.begin(), spec_.hidden_widths.end());
  front_ = nn::Mlp::create(params_, "front", widths, nn::activation_from_string(spec_.hidden_activation),
                           nn::activation_from_string(spec_.front_output), spec_.omega0, spec_.first_omega0);
  kernels_ = nn::CgKernelLayer::create(params_, "rbf", spec_.n_kernels, spec_.kernels_per_group);
  out_ = nn::Mlp::create(params_, "out", {spec_.n_kernels, spec_.q_out}, nn::Activation::identity,
                         nn::Activation::identity);
}

void CgrbfModel::initialize(std::uint64_t seed) {
  Rng rng = Rng::stream(seed, kInitStream);
  double* p = params_.data();
  front_.initialize(p, rng);
  const double lambda = rt::kSpeedOfLight / spec_.frequency_hz;
  const double beta0 = -1.0 / (2.0 * spec_.sigma0_m * spec_.sigma0_m);
  const rt::Box& cb = spec_.c_init_box;
  for (std::size_t j = 0; j < kernels_.n_kernels; ++j) {
    nn::CgKernel k;
    k.w = rng.normal(spec_.effective_w_init_mean(), spec_.w_init_std);
    for (std::size_t i = 0; i < 3; ++i) k.a[i] = spec_.bs_position[i] + rng.uniform(-0.5 * lambda, 0.5 * lambda);
    k.b = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < 3; ++i) k.c[i] = rng.uniform(cb.min[i], cb.max[i]);
    k.beta = beta0;
    kernels_.set_kernel(p, j, k);
  }
  out_.initialize(p, rng);
}

std::span<const double> CgrbfModel::kernel_outputs(const nn::Tape& tape) { return tape.buffers.at(kPhi); }
std::span<const double> CgrbfModel::triples(const nn::Tape& tape) { return tape.buffers.at(kTriples); }

void CgrbfModel::forward(std::span<const double> x, std::span<double> y, nn::Tape& tape) const {
  if (x.size() != 3 || y.size() != spec_.q_out) throw nn::NnError("cgrbf forward: shape mismatch");
  const double* p = params_.data();
  std::span<const double> in = x;
  if (!input_map_.empty()) {
    auto& buf = tape.buffer(kNormX, 3);
    input_map_.apply(x, buf);
    in = buf;
  }
  const auto f = front_.forward(p, in, tape.mlp(kFront), tape.counter);
  auto& g = tape.buffer(kTriples, f.size());
  if (spec_.residual_front) {
    const double s = spec_.front_scale_m;
    for (std::size_t i = 0; i < f.size(); ++i) g[i] = x[i % 3] + (s == 1.0 ? f[i] : s * f[i]);
    if (tape.counter && s != 1.0) tape.counter->multiplications += f.size();
  } else {
    std::copy(f.begin(), f.end(), g.begin());
  }
  auto& phi = tape.buffer(kPhi, kernels_.n_kernels);
  kernels_.forward(p, g, phi, tape.counter);
  const auto out = out_.forward(p, phi, tape.mlp(kOut), tape.counter);
  std::copy(out.begin(), out.end(), y.begin());
}

void CgrbfModel::backward(std::span<const double> x, nn::Tape& tape, std::span<const double> dy,
                          std::span<double> grad, std::span<double> dx) const {
  if (grad.size() != params_.size()) throw nn::NnError("cgrbf backward: gradient buffer size mismatch");
  const double* p = params_.data();
  auto& dphi = tape.buffer(kDPhi, kernels_.n_kernels);
  out_.backward(p, tape.buffers.at(kPhi), tape.mlp(kOut), dy, grad.data(), dphi);
  auto& dg = tape.buffer(kDTriples, kernels_.input_width());
  kernels_.backward(p, tape.buffers.at(kTriples), dphi, grad.data(), dg);
  if (spec_.residual_front && spec_.front_scale_m != 1.0) {
    // Scale into the front's gradient; dg itself is still needed for dx.
    auto& df = tape.buffer(kDNormX + 1, dg.size());
    for (std::size_t i = 0; i < dg.size(); ++i) df[i] = spec_.front_scale_m * dg[i];
    std::span<const double> in = input_map_.empty() ? x : std::span<const double>(tape.buffers.at(kNormX));
    auto& dn = tape.buffer(kDNormX, dx.empty() ? 0 : 3);
    front_.backward(p, in, tape.mlp(kFront), df, grad.data(), dn);
  } else {
    std::span<const double> in = input_map_.empty() ? x : std::span<const double>(tape.buffers.at(kNormX));
    auto& dn = tape.buffer(kDNormX, dx.empty() ? 0 : 3);
    front_.backward(p, in, tape.mlp(kFront), dg, grad.data(), dn);
  }
  if (dx.empty()) return;
  const auto& dn = tape.buffers.at(kDNormX);
  for (std::size_t i = 0; i < 3; ++i) dx[i] = input_map_.empty() ? dn[i] : dn[i] * input_map_.inv_scale[i];
  if (spec_.residual_front) {
    for (std::size_t t = 0; t < dg.size(); ++t) dx[t % 3] += dg[t];
  }
}

void CgrbfModel::project() { kernels_.clamp_beta(params_.data()); }

}  // namespace cirforge::models
