#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cirforge/nn/network.hpp"

namespace cirforge::nn {

struct GradCheckOptions {
  double step = 1e-6;
  double tolerance = 1e-4;
  // Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor).
  double floor = 1e-4;
  // Check at most this many elements per tensor (0 = all), spread evenly.
  std::size_t max_per_tensor = 0;
  bool check_input = true;
};

struct GradCheckGroup {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckGroup> groups;
  double tolerance = 0.0;

  bool passed() const;
  double max_rel_error() const;
  std::string worst_group() const;
  std::string format() const;
};

double relative_error(double analytic, double numeric, double floor);

// Compares model.backward against central differences of
// mse_loss(model(x), label) for every parameter (and the input).
GradCheckReport gradient_check(Model& model, std::span<const double> input, std::span<const double> label,
                               const GradCheckOptions& options = {});

// Hook for fault injection in tests: alters the analytic gradient before comparison.
GradCheckReport gradient_check(Model& model, std::span<const double> input, std::span<const double> label,
                               const GradCheckOptions& options,
                               const std::function<void(std::span<double> grad)>& tamper);

}  // namespace cirforge::nn
