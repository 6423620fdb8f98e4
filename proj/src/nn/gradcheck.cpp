#include "cirforge/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cirforge/nn/loss.hpp"

namespace cirforge::nn {

namespace {

double loss_at(const Model& model, std::span<const double> x, std::span<const double> label, Tape& tape,
               std::vector<double>& pred) {
  model.forward(x, pred, tape);
  return mse_loss(pred, label);
}

void update_group(GradCheckGroup& g, std::size_t index, double analytic, double numeric, double floor) {
  const double err = relative_error(analytic, numeric, floor);
  ++g.checked;
  if (err > g.max_rel_error || g.checked == 1) {
    g.max_rel_error = err;
    g.worst_index = index;
    g.analytic = analytic;
    g.numeric = numeric;
  }
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t max_count) {
  std::vector<std::size_t> idx;
  if (max_count == 0 || n <= max_count) {
    for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
    return idx;
  }
  for (std::size_t k = 0; k < max_count; ++k) idx.push_back(k * n / max_count);
  return idx;
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

bool GradCheckReport::passed() const {
  return std::all_of(groups.begin(), groups.end(),
                     [&](const GradCheckGroup& g) { return g.max_rel_error < tolerance; });
}

double GradCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& g : groups) m = std::max(m, g.max_rel_error);
  return m;
}

std::string GradCheckReport::worst_group() const {
  const GradCheckGroup* worst = nullptr;
  for (const auto& g : groups) {
    if (!worst || g.max_rel_error > worst->max_rel_error) worst = &g;
  }
  return worst ? worst->name : std::string();
}

std::string GradCheckReport::format() const {
  std::string out = fmt::format("{:<28} {:>8} {:>12} {:>8} {:>14} {:>14}  {}\n", "group", "checked", "max_rel_err",
                                "index", "analytic", "numeric", "status");
  for (const auto& g : groups) {
    out += fmt::format("{:<28} {:>8} {:>12.3e} {:>8} {:>14.6e} {:>14.6e}  {}\n", g.name, g.checked, g.max_rel_error,
                       g.worst_index, g.analytic, g.numeric, g.max_rel_error < tolerance ? "ok" : "FAIL");
  }
  out += fmt::format("tolerance {:.1e}: {}\n", tolerance, passed() ? "PASS" : "FAIL");
  return out;
}

GradCheckReport gradient_check(Model& model, std::span<const double> input, std::span<const double> label,
                               const GradCheckOptions& options) {
  return gradient_check(model, input, label, options, {});
}

GradCheckReport gradient_check(Model& model, std::span<const double> input, std::span<const double> label,
                               const GradCheckOptions& options,
                               const std::function<void(std::span<double> grad)>& tamper) {
  if (input.size() != model.input_width() || label.size() != model.output_width()) {
    throw NnError("gradient_check: input/label width mismatch");
  }
  Tape tape;
  std::vector<double> pred(model.output_width());
  std::vector<double> dpred(model.output_width());
  model.forward(input, pred, tape);
  mse_loss(pred, label, dpred);
  std::vector<double> grad(model.params().size(), 0.0);
  std::vector<double> dx(input.size(), 0.0);
  model.backward(input, tape, dpred, grad, dx);
  if (tamper) tamper(grad);

  GradCheckReport report;
  report.tolerance = options.tolerance;
  const double h = options.step;
  auto values = model.params().values();
  for (const TensorInfo& t : model.params().tensors()) {
    GradCheckGroup g;
    g.name = t.name;
    for (std::size_t k : sample_indices(t.size, options.max_per_tensor)) {
      const std::size_t i = t.offset + k;
      const double saved = values[i];
      values[i] = saved + h;
      const double up = loss_at(model, input, label, tape, pred);
      values[i] = saved - h;
      const double down = loss_at(model, input, label, tape, pred);
      values[i] = saved;
      update_group(g, k, grad[i], (up - down) / (2.0 * h), options.floor);
    }
    report.groups.push_back(g);
  }
  if (options.check_input) {
    GradCheckGroup g;
    g.name = "input";
    std::vector<double> x(input.begin(), input.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double saved = x[i];
      x[i] = saved + h;
      const double up = loss_at(model, x, label, tape, pred);
      x[i] = saved - h;
      const double down = loss_at(model, x, label, tape, pred);
      x[i] = saved;
      update_group(g, i, dx[i], (up - down) / (2.0 * h), options.floor);
    }
    report.groups.push_back(g);
  }
  return report;
}

}  // namespace cirforge::nn
