#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace cirforge::simd {

// Every variant of a kernel must produce bit-identical results: the scalar
// reference accumulates in the same lane order the vector code uses, and no
// variant may contract a*b+c into a fused multiply-add.

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

struct AdamCoeffs {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double bias_correction1 = 1.0;  // 1 - beta1^t
  double bias_correction2 = 1.0;  // 1 - beta2^t
};

struct KernelTable {
  Isa isa;
  // sum_i a[i] * b[i], 8 interleaved partial sums.
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[r] = dot(W[r, :], x) + bias[r]; bias may be null. W is row-major rows x cols.
  void (*gemv)(const double* w, std::size_t rows, std::size_t cols, const double* x, const double* bias,
               double* y);
  // dx[c] += sum_r W[r, c] * dy[r], accumulated row by row.
  void (*gemv_t_acc)(const double* w, std::size_t rows, std::size_t cols, const double* dy, double* dx);
  // G[r, c] += dy[r] * x[c]
  void (*ger_acc)(double* g, std::size_t rows, std::size_t cols, const double* dy, const double* x);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // In-place bias-corrected Adam update over a flat parameter block.
  void (*adam_update)(double* param, double* m, double* v, const double* grad, std::size_t n,
                      const AdamCoeffs& c);
};

const KernelTable& scalar_kernels();

// Null when the AVX2 variant was not compiled in.
const KernelTable* avx2_kernels();

bool cpu_supports(Isa isa);

// Best supported ISA, unless CIRFORGE_SIMD=scalar forces the reference path.
Isa detect_isa();

// The table every caller goes through. Selected once at first use.
const KernelTable& active();

// Test hook. Throws std::runtime_error if the ISA is unavailable.
void set_active(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}

}  // namespace cirforge::simd
