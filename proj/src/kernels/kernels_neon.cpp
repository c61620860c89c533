#include "freshrec/kernels.hpp"

#if defined(FRESHREC_KERNELS_NEON_BUILT)

#include <arm_neon.h>

namespace freshrec::kernels::neon {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  if (i + 2 <= n) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    i += 2;
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vy = vld1q_f64(y + i);
    vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
    vst1q_f64(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void matvec(const double* rows, std::size_t n_rows, std::size_t width,
            const double* v, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    out[r] = dot(rows + r * width, v, width);
  }
}

void accumulate_weighted_rows(const double* rows, std::size_t n_rows,
                              std::size_t width, const double* coef,
                              double* acc) {
  if (width == 8) {
    float64x2_t a0 = vld1q_f64(acc);
    float64x2_t a1 = vld1q_f64(acc + 2);
    float64x2_t a2 = vld1q_f64(acc + 4);
    float64x2_t a3 = vld1q_f64(acc + 6);
    for (std::size_t r = 0; r < n_rows; ++r) {
      const float64x2_t c = vdupq_n_f64(coef[r]);
      const double* row = rows + r * 8;
      a0 = vfmaq_f64(a0, c, vld1q_f64(row));
      a1 = vfmaq_f64(a1, c, vld1q_f64(row + 2));
      a2 = vfmaq_f64(a2, c, vld1q_f64(row + 4));
      a3 = vfmaq_f64(a3, c, vld1q_f64(row + 6));
    }
    vst1q_f64(acc, a0);
    vst1q_f64(acc + 2, a1);
    vst1q_f64(acc + 4, a2);
    vst1q_f64(acc + 6, a3);
    return;
  }
  for (std::size_t r = 0; r < n_rows; ++r) {
    axpy(coef[r], rows + r * width, acc, width);
  }
}

}  // namespace freshrec::kernels::neon

#endif  // FRESHREC_KERNELS_NEON_BUILT
