#include "freshrec/kernels.hpp"

// Reference path. Straight left-to-right loops; the vector variants are
// checked against these in the equivalence suite.
namespace freshrec::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
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
  for (std::size_t r = 0; r < n_rows; ++r) {
    const double c = coef[r];
    const double* row = rows + r * width;
    for (std::size_t j = 0; j < width; ++j) acc[j] += c * row[j];
  }
}

}  // namespace freshrec::kernels::scalar
