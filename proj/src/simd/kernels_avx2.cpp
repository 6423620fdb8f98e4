// Compiled with -mavx2 (no -mfma): only reached after a runtime CPU check.
#include "kernels_impl.hpp"

#include <immintrin.h>

namespace cirforge::simd::detail {

namespace {

inline double hsum_pairwise(__m256d v) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, v);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  double s = hsum_pairwise(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void gemv_avx2(const double* w, std::size_t rows, std::size_t cols, const double* x, const double* bias,
               double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double d = dot_avx2(w + r * cols, x, cols);
    y[r] = bias ? d + bias[r] : d;
  }
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(x + i), va);
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void gemv_t_acc_avx2(const double* w, std::size_t rows, std::size_t cols, const double* dy, double* dx) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double g = dy[r];
    if (g == 0.0) continue;
    axpy_avx2(g, w + r * cols, dx, cols);
  }
}

void ger_acc_avx2(double* g, std::size_t rows, std::size_t cols, const double* dy, const double* x) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double d = dy[r];
    if (d == 0.0) continue;
    axpy_avx2(d, x, g + r * cols, cols);
  }
}

void adam_update_avx2(double* p, double* m, double* v, const double* g, std::size_t n, const AdamCoeffs& c) {
  const double one_minus_b1 = 1.0 - c.beta1;
  const double one_minus_b2 = 1.0 - c.beta2;
  const __m256d b1 = _mm256_set1_pd(c.beta1);
  const __m256d b2 = _mm256_set1_pd(c.beta2);
  const __m256d omb1 = _mm256_set1_pd(one_minus_b1);
  const __m256d omb2 = _mm256_set1_pd(one_minus_b2);
  const __m256d bc1 = _mm256_set1_pd(c.bias_correction1);
  const __m256d bc2 = _mm256_set1_pd(c.bias_correction2);
  const __m256d lr = _mm256_set1_pd(c.lr);
  const __m256d eps = _mm256_set1_pd(c.epsilon);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gi = _mm256_loadu_pd(g + i);
    const __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(omb1, gi));
    const __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(omb2, _mm256_mul_pd(gi, gi)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d m_hat = _mm256_div_pd(mi, bc1);
    const __m256d v_hat = _mm256_div_pd(vi, bc2);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(lr, m_hat), _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps));
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
  }
  if (i < n) kScalarTable.adam_update(p + i, m + i, v + i, g + i, n - i, c);
}

}  // namespace

const KernelTable kAvx2Table{
    Isa::avx2, dot_avx2, gemv_avx2, gemv_t_acc_avx2, ger_acc_avx2, axpy_avx2, adam_update_avx2,
};

}  // namespace cirforge::simd::detail
