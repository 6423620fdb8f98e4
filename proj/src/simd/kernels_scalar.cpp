#include "kernels_impl.hpp"

#include <cmath>

namespace cirforge::simd::detail {

namespace {

// Mirrors the two 4-wide accumulators of the vector path: lanes 0..3 and 4..7
// are summed pairwise, then reduced as (l0 + l1) + (l2 + l3).
double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t l = 0; l < 8; ++l) acc[l] += a[i + l] * b[i + l];
  }
  double lane[4];
  for (std::size_t l = 0; l < 4; ++l) lane[l] = acc[l] + acc[l + 4];
  double s = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void gemv_scalar(const double* w, std::size_t rows, std::size_t cols, const double* x, const double* bias,
                 double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double d = dot_scalar(w + r * cols, x, cols);
    y[r] = bias ? d + bias[r] : d;
  }
}

void gemv_t_acc_scalar(const double* w, std::size_t rows, std::size_t cols, const double* dy, double* dx) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double g = dy[r];
    if (g == 0.0) continue;
    const double* row = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) dx[c] += row[c] * g;
  }
}

void ger_acc_scalar(double* g, std::size_t rows, std::size_t cols, const double* dy, const double* x) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double d = dy[r];
    if (d == 0.0) continue;
    double* row = g + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += d * x[c];
  }
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void adam_update_scalar(double* p, double* m, double* v, const double* g, std::size_t n, const AdamCoeffs& c) {
  const double one_minus_b1 = 1.0 - c.beta1;
  const double one_minus_b2 = 1.0 - c.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = c.beta1 * m[i] + one_minus_b1 * g[i];
    v[i] = c.beta2 * v[i] + one_minus_b2 * (g[i] * g[i]);
    const double m_hat = m[i] / c.bias_correction1;
    const double v_hat = v[i] / c.bias_correction2;
    p[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

}  // namespace

const KernelTable kScalarTable{
    Isa::scalar, dot_scalar, gemv_scalar, gemv_t_acc_scalar, ger_acc_scalar, axpy_scalar, adam_update_scalar,
};

}  // namespace cirforge::simd::detail
