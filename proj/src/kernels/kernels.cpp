#include "freshrec/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "freshrec/error.hpp"

namespace freshrec::kernels {

namespace {

struct Vtable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*matvec)(const double*, std::size_t, std::size_t, const double*, double*);
  void (*accumulate_weighted_rows)(const double*, std::size_t, std::size_t,
                                   const double*, double*);
};

constexpr Vtable kScalarTable{&scalar::dot, &scalar::axpy, &scalar::matvec,
                              &scalar::accumulate_weighted_rows};

#if defined(FRESHREC_KERNELS_AVX2_BUILT)
constexpr Vtable kAvx2Table{&avx2::dot, &avx2::axpy, &avx2::matvec,
                            &avx2::accumulate_weighted_rows};
#endif
#if defined(FRESHREC_KERNELS_NEON_BUILT)
constexpr Vtable kNeonTable{&neon::dot, &neon::axpy, &neon::matvec,
                            &neon::accumulate_weighted_rows};
#endif

bool cpu_supports(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(FRESHREC_KERNELS_AVX2_BUILT)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::neon:
#if defined(FRESHREC_KERNELS_NEON_BUILT)
      return true;  // baseline on aarch64
#else
      return false;
#endif
  }
  return false;
}

const Vtable* table_for(Backend b) {
  switch (b) {
    case Backend::scalar:
      return &kScalarTable;
    case Backend::avx2:
#if defined(FRESHREC_KERNELS_AVX2_BUILT)
      return &kAvx2Table;
#else
      break;
#endif
    case Backend::neon:
#if defined(FRESHREC_KERNELS_NEON_BUILT)
      return &kNeonTable;
#else
      break;
#endif
  }
  return &kScalarTable;
}

Backend detect() {
  if (const char* env = std::getenv("FRESHREC_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_supports(Backend::avx2)) return Backend::avx2;
    if (std::strcmp(env, "neon") == 0 && cpu_supports(Backend::neon)) return Backend::neon;
    return Backend::scalar;  // unknown or unsupported request: safe fallback
  }
  if (cpu_supports(Backend::avx2)) return Backend::avx2;
  if (cpu_supports(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

struct Dispatch {
  Backend backend;
  const Vtable* table;
  Dispatch() : backend(detect()), table(table_for(backend)) {}
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  return dispatch().table->dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  dispatch().table->axpy(alpha, x, y, n);
}

void matvec(const double* rows, std::size_t n_rows, std::size_t width,
            const double* v, double* out) {
  dispatch().table->matvec(rows, n_rows, width, v, out);
}

void accumulate_weighted_rows(const double* rows, std::size_t n_rows,
                              std::size_t width, const double* coef,
                              double* acc) {
  dispatch().table->accumulate_weighted_rows(rows, n_rows, width, coef, acc);
}

Backend active_backend() { return dispatch().backend; }

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "scalar";
}

bool backend_supported(Backend b) { return cpu_supports(b); }

void force_backend(Backend b) {
  if (!cpu_supports(b)) {
    fail("kernel backend not supported on this machine: " +
         std::string(backend_name(b)));
  }
  dispatch().backend = b;
  dispatch().table = table_for(b);
}

}  // namespace freshrec::kernels
