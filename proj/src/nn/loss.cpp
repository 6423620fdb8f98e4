#include "cirforge/nn/loss.hpp"

#include "cirforge/nn/param_store.hpp"

namespace cirforge::nn {

double mse_loss(std::span<const double> pred, std::span<const double> label, std::span<double> dpred) {
  if (pred.size() != label.size() || pred.empty()) throw NnError("mse_loss: length mismatch");
  if (!dpred.empty() && dpred.size() != pred.size()) throw NnError("mse_loss: gradient length mismatch");
  const double q = static_cast<double>(pred.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - label[i];
    sum += e * e;
    if (!dpred.empty()) dpred[i] = 2.0 * e / q;
  }
  return sum / q;
}

}  // namespace cirforge::nn
