#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cirforge::nn {

class NnError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Named slice of the flat parameter buffer. Row-major.
struct TensorInfo {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
};

// Owned row-major tensor, used for standalone values outside a ParamStore.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s);
  std::size_t size() const { return data.size(); }
  double& at(std::size_t r, std::size_t c) { return data[r * shape.at(1) + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * shape.at(1) + c]; }
};

std::size_t shape_size(std::span<const std::size_t> shape);

// Every trainable value of a model lives in one contiguous buffer so the
// optimizer and the gradient checker can treat a model as a flat vector.
class ParamStore {
 public:
  // Reserves a zero-filled tensor; returns its offset. Names must be unique.
  std::size_t add(const std::string& name, std::vector<std::size_t> shape);

  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  const TensorInfo& info(const std::string& name) const;
  std::span<double> view(const std::string& name);
  std::span<const double> view(const std::string& name) const;
  // Tensor that owns flat index i.
  const TensorInfo& owner(std::size_t index) const;

  bool all_finite() const;

 private:
  std::vector<double> values_;
  std::vector<TensorInfo> tensors_;
};

}  // namespace cirforge::nn
