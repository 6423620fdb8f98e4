#pragma once

#include <cstdint>
#include <vector>

#include "cirforge/exp/trainer.hpp"

namespace cirforge::exp {

// 1-D latent-periodic target f(x) = A(x) cos(k x) with a smooth Gaussian
// envelope A, sampled once per equal-width cell of [0, wavelengths * 2 pi / k].
struct LatentPeriodicOptions {
  std::size_t n_train = 40;
  double wavelengths = 10.0;
  std::size_t n_test = 1000;
  std::vector<std::size_t> hidden{32, 32};
  double omega0 = 10.0;
  TrainConfig train{3000, 20, 1e-3, 0, 250, {}};
};

struct LatentPeriodicResult {
  double sine_test_mse = 0.0;
  double tanh_test_mse = 0.0;
  ConvergenceCurve sine_curve;
  ConvergenceCurve tanh_curve;
  std::vector<double> train_x, train_y;
};

double latent_periodic_target(double x, double wavelengths);

// Trains an equal-size sine MLP and tanh MLP on the same samples and seed.
LatentPeriodicResult run_latent_periodic(const LatentPeriodicOptions& options);

}  // namespace cirforge::exp
