#pragma once

#include <span>

namespace cirforge::nn {

// (1/q) sum (label - pred)^2. When dpred is non-empty it receives (2/q)(pred - label).
double mse_loss(std::span<const double> pred, std::span<const double> label, std::span<double> dpred = {});

}  // namespace cirforge::nn
