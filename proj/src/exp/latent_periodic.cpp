#include "cirforge/exp/latent_periodic.hpp"

#include <cmath>
#include <numbers>

#include "cirforge/nn/loss.hpp"
#include "cirforge/util/rng.hpp"

namespace cirforge::exp {

namespace {

constexpr std::uint64_t kSampleStream = 0x6c617465;  // "late"
constexpr std::uint64_t kInitStream = 0x696e6974;    // "init"

// The domain is [0, 1] in units of the whole span; k = 2 pi * wavelengths.
double envelope(double x) { return std::exp(-std::pow((x - 0.5) / 0.35, 2.0)) + 0.25; }

double test_mse(const nn::Model& model, std::size_t n_test, double wavelengths) {
  nn::Tape tape;
  std::vector<double> in(1), out(1);
  double sum = 0.0;
  for (std::size_t i = 0; i < n_test; ++i) {
    in[0] = (static_cast<double>(i) + 0.5) / static_cast<double>(n_test);
    model.forward(in, out, tape);
    const double e = out[0] - latent_periodic_target(in[0], wavelengths);
    sum += e * e;
  }
  return sum / static_cast<double>(n_test);
}

}  // namespace

double latent_periodic_target(double x, double wavelengths) {
  return envelope(x) * std::cos(2.0 * std::numbers::pi * wavelengths * x);
}

LatentPeriodicResult run_latent_periodic(const LatentPeriodicOptions& o) {
  if (o.n_train == 0 || o.n_test == 0 || !(o.wavelengths > 0.0)) {
    throw std::invalid_argument("latent_periodic: invalid options");
  }
  LatentPeriodicResult result;
  Rng rng = Rng::stream(o.train.seed, kSampleStream);
  TrainingSet set;
  for (std::size_t i = 0; i < o.n_train; ++i) {
    // One sample per equal-width cell of the domain.
    const double x = (static_cast<double>(i) + rng.uniform()) / static_cast<double>(o.n_train);
    const double y = latent_periodic_target(x, o.wavelengths);
    result.train_x.push_back(x);
    result.train_y.push_back(y);
    set.x.push_back({x});
    set.y.push_back({y});
  }
  std::vector<std::size_t> widths{1};
  widths.insert(widths.end(), o.hidden.begin(), o.hidden.end());
  widths.push_back(1);
  nn::InputMap map{{0.5}, {2.0}};  // [0, 1] -> [-1, 1]
  double energy = 0.0;
  for (std::size_t i = 0; i < o.n_test; ++i) {
    const double t = latent_periodic_target((static_cast<double>(i) + 0.5) / static_cast<double>(o.n_test), o.wavelengths);
    energy += t * t / static_cast<double>(o.n_test);
  }

  auto run = [&](nn::Activation act, ConvergenceCurve& curve) {
    nn::MlpModel model(act == nn::Activation::sine ? "sine_mlp" : "tanh_mlp", widths, act, nn::Activation::identity,
                       o.omega0, 0.0, map);
    Rng init = Rng::stream(o.train.seed, kInitStream);
    model.initialize(init);
    const Evaluator eval = [&](const nn::Model& m) { return test_mse(m, o.n_test, o.wavelengths) / energy; };
    curve = train(model, set, o.train, eval);
    return test_mse(model, o.n_test, o.wavelengths);
  };
  result.sine_test_mse = run(nn::Activation::sine, result.sine_curve);
  result.tanh_test_mse = run(nn::Activation::tanh, result.tanh_curve);
  return result;
}

}  // namespace cirforge::exp
