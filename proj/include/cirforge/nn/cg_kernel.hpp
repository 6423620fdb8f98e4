#pragma once

#include <array>
#include <span>
#include <string>

#include "cirforge/nn/dense.hpp"
#include "cirforge/nn/param_store.hpp"

namespace cirforge::nn {

// phi(x) = cos(w |x - a| + b) * exp(beta |x - c|^2)
struct CgKernel {
  std::array<double, 3> a{};
  double b = 0.0;
  std::array<double, 3> c{};
  double beta = 0.0;  // <= 0
  double w = 0.0;
};

struct CgKernelGrad {
  std::array<double, 3> a{};
  double b = 0.0;
  std::array<double, 3> c{};
  double beta = 0.0;
  double w = 0.0;
  std::array<double, 3> x{};
};

double cg_kernel_forward(const CgKernel& k, std::span<const double, 3> x);

// Gradients of dphi * phi(x). At x = a the radial direction is taken as zero.
CgKernelGrad cg_kernel_backward(const CgKernel& k, std::span<const double, 3> x, double dphi);

// Packed parameter order inside a ParamStore tensor row.
inline constexpr std::size_t kCgA = 0, kCgB = 3, kCgC = 4, kCgBeta = 7, kCgW = 8, kCgStride = 9;

// A bank of kernels reading consecutive input triples. With
// kernels_per_group = k, kernel j reads triple j / k, so the input width is
// 3 * n_kernels / k and the output width is n_kernels.
struct CgKernelLayer {
  std::size_t n_kernels = 0;
  std::size_t kernels_per_group = 1;
  std::size_t offset = 0;  // tensor of shape (n_kernels, 9): a(3), b, c(3), beta, w

  static CgKernelLayer create(ParamStore& store, const std::string& name, std::size_t n_kernels,
                              std::size_t kernels_per_group = 1);

  std::size_t input_width() const { return 3 * n_kernels / kernels_per_group; }
  std::size_t parameter_count() const { return kCgStride * n_kernels; }

  CgKernel kernel(const double* params, std::size_t j) const;
  void set_kernel(double* params, std::size_t j, const CgKernel& k) const;

  void forward(const double* params, std::span<const double> x, std::span<double> y,
               OpCounter* counter = nullptr) const;
  // Accumulates parameter gradients into grad; writes dx when non-empty.
  void backward(const double* params, std::span<const double> x, std::span<const double> dy, double* grad,
                std::span<double> dx) const;

  // Projects every beta onto beta <= 0.
  void clamp_beta(double* params) const;
};

}  // namespace cirforge::nn
