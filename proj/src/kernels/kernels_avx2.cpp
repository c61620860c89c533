#include "freshrec/kernels.hpp"

#if defined(FRESHREC_KERNELS_AVX2_BUILT)

#include <immintrin.h>

namespace freshrec::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void matvec(const double* rows, std::size_t n_rows, std::size_t width,
            const double* v, double* out) {
  if (width == 8) {
    // Ranker feature width; keep the weight vector in registers.
    const __m256d w0 = _mm256_loadu_pd(v);
    const __m256d w1 = _mm256_loadu_pd(v + 4);
    for (std::size_t r = 0; r < n_rows; ++r) {
      const double* row = rows + r * 8;
      __m256d acc = _mm256_mul_pd(_mm256_loadu_pd(row), w0);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + 4), w1, acc);
      out[r] = hsum(acc);
    }
    return;
  }
  for (std::size_t r = 0; r < n_rows; ++r) {
    out[r] = dot(rows + r * width, v, width);
  }
}

void accumulate_weighted_rows(const double* rows, std::size_t n_rows,
                              std::size_t width, const double* coef,
                              double* acc) {
  if (width == 8) {
    __m256d a0 = _mm256_loadu_pd(acc);
    __m256d a1 = _mm256_loadu_pd(acc + 4);
    for (std::size_t r = 0; r < n_rows; ++r) {
      const __m256d c = _mm256_set1_pd(coef[r]);
      const double* row = rows + r * 8;
      a0 = _mm256_fmadd_pd(c, _mm256_loadu_pd(row), a0);
      a1 = _mm256_fmadd_pd(c, _mm256_loadu_pd(row + 4), a1);
    }
    _mm256_storeu_pd(acc, a0);
    _mm256_storeu_pd(acc + 4, a1);
    return;
  }
  for (std::size_t r = 0; r < n_rows; ++r) {
    axpy(coef[r], rows + r * width, acc, width);
  }
}

}  // namespace freshrec::kernels::avx2

#endif  // FRESHREC_KERNELS_AVX2_BUILT
