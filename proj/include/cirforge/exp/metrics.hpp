#pragma once

#include <span>
#include <vector>

#include "cirforge/data/dataset.hpp"
#include "cirforge/nn/network.hpp"

namespace cirforge::exp {

// sum |y - y_hat|^2 / sum |y|^2 for one vector. Throws for a zero label.
double nmse(std::span<const double> pred, std::span<const double> label);

// Mean per-record NMSE of a position -> CIR model. The model works in scaled
// units; predictions are divided by scale_factor and compared against the
// clean original-unit labels. Records with an all-zero label are skipped.
// Throws for an empty split.
double evaluate_nmse(const nn::Model& model, std::span<const data::SampleRecord> records, double scale_factor);

// Same for explicit (input, original-unit label) pairs.
double evaluate_nmse_pairs(const nn::Model& model, const std::vector<std::vector<double>>& inputs,
                           const std::vector<std::vector<double>>& labels, double scale_factor);

}  // namespace cirforge::exp
