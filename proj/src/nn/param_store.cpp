#include "cirforge/nn/param_store.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cirforge::nn {

Tensor::Tensor(std::vector<std::size_t> s) : shape(std::move(s)), data(shape_size(shape), 0.0) {}

std::size_t shape_size(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::size_t ParamStore::add(const std::string& name, std::vector<std::size_t> shape) {
  for (const auto& t : tensors_) {
    if (t.name == name) throw NnError("duplicate parameter name '" + name + "'");
  }
  TensorInfo info;
  info.name = name;
  info.size = shape_size(shape);
  info.shape = std::move(shape);
  info.offset = values_.size();
  values_.resize(values_.size() + info.size, 0.0);
  tensors_.push_back(std::move(info));
  return tensors_.back().offset;
}

const TensorInfo& ParamStore::info(const std::string& name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return t;
  }
  throw NnError("no parameter named '" + name + "'");
}

std::span<double> ParamStore::view(const std::string& name) {
  const TensorInfo& t = info(name);
  return {values_.data() + t.offset, t.size};
}

std::span<const double> ParamStore::view(const std::string& name) const {
  const TensorInfo& t = info(name);
  return {values_.data() + t.offset, t.size};
}

const TensorInfo& ParamStore::owner(std::size_t index) const {
  auto it = std::upper_bound(tensors_.begin(), tensors_.end(), index,
                             [](std::size_t i, const TensorInfo& t) { return i < t.offset; });
  if (it == tensors_.begin() || index >= values_.size()) throw NnError("parameter index out of range");
  return *std::prev(it);
}

bool ParamStore::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace cirforge::nn
