#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops behind feature math, candidate scoring and the
// ranker training loop. Every kernel has a scalar reference implementation;
// an AVX2+FMA variant (x86-64) or a NEON variant (aarch64) is selected once
// at process start when the CPU supports it. The environment variable
// FRESHREC_KERNELS=scalar|avx2|neon overrides detection.
//
// Vector variants may reassociate sums, so results can differ from the scalar
// reference in the last few ulps; the equivalence suite bounds that drift.
namespace freshrec::kernels {

enum class Backend { scalar, avx2, neon };

// sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);

// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

// out[r] = dot(rows[r*width .. ], v) for r in [0, n_rows)
void matvec(const double* rows, std::size_t n_rows, std::size_t width,
            const double* v, double* out);

// acc[j] += sum_r coef[r] * rows[r*width + j]   (A^T c, accumulating)
void accumulate_weighted_rows(const double* rows, std::size_t n_rows,
                              std::size_t width, const double* coef,
                              double* acc);

Backend active_backend();
std::string_view backend_name(Backend b);
bool backend_supported(Backend b);

// Test hook: swap the dispatch table. Throws Error if the backend is not
// supported on this machine. Not safe to call concurrently with kernel use.
void force_backend(Backend b);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void matvec(const double* rows, std::size_t n_rows, std::size_t width,
            const double* v, double* out);
void accumulate_weighted_rows(const double* rows, std::size_t n_rows,
                              std::size_t width, const double* coef,
                              double* acc);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define FRESHREC_KERNELS_AVX2_BUILT 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void matvec(const double* rows, std::size_t n_rows, std::size_t width,
            const double* v, double* out);
void accumulate_weighted_rows(const double* rows, std::size_t n_rows,
                              std::size_t width, const double* coef,
                              double* acc);
}  // namespace avx2
#endif

#if defined(__aarch64__)
#define FRESHREC_KERNELS_NEON_BUILT 1
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void matvec(const double* rows, std::size_t n_rows, std::size_t width,
            const double* v, double* out);
void accumulate_weighted_rows(const double* rows, std::size_t n_rows,
                              std::size_t width, const double* coef,
                              double* acc);
}  // namespace neon
#endif

}  // namespace freshrec::kernels
