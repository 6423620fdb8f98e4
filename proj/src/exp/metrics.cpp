#include "cirforge/exp/metrics.hpp"

#include <stdexcept>

namespace cirforge::exp {

double nmse(std::span<const double> pred, std::span<const double> label) {
  if (pred.size() != label.size()) throw std::invalid_argument("nmse: length mismatch");
  double err = 0.0, energy = 0.0;
  for (std::size_t i = 0; i < label.size(); ++i) {
    const double d = label[i] - pred[i];
    err += d * d;
    energy += label[i] * label[i];
  }
  if (energy == 0.0) throw std::invalid_argument("nmse: label has zero energy");
  return err / energy;
}

double evaluate_nmse(const nn::Model& model, std::span<const data::SampleRecord> records, double scale_factor) {
  if (records.empty()) throw std::invalid_argument("evaluate_nmse: empty split");
  nn::Tape tape;
  std::vector<double> x(3), y(model.output_width());
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : records) {
    double energy = 0.0;
    for (double v : r.cir) energy += v * v;
    if (energy == 0.0) continue;
    x = {r.position.x, r.position.y, r.position.z};
    model.forward(x, y, tape);
    for (double& v : y) v /= scale_factor;
    sum += nmse(y, r.cir);
    ++n;
  }
  if (n == 0) throw std::invalid_argument("evaluate_nmse: every test label is zero");
  return sum / static_cast<double>(n);
}

double evaluate_nmse_pairs(const nn::Model& model, const std::vector<std::vector<double>>& inputs,
                           const std::vector<std::vector<double>>& labels, double scale_factor) {
  if (inputs.empty() || inputs.size() != labels.size()) throw std::invalid_argument("evaluate_nmse_pairs: bad split");
  nn::Tape tape;
  std::vector<double> y(model.output_width());
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    double energy = 0.0;
    for (double v : labels[i]) energy += v * v;
    if (energy == 0.0) continue;
    model.forward(inputs[i], y, tape);
    for (double& v : y) v /= scale_factor;
    sum += nmse(y, labels[i]);
    ++n;
  }
  if (n == 0) throw std::invalid_argument("evaluate_nmse_pairs: every label is zero");
  return sum / static_cast<double>(n);
}

}  // namespace cirforge::exp
