#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "freshrec/kernels.hpp"
#include "freshrec/rng.hpp"

using namespace freshrec;
namespace k = freshrec::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = uniform_range(rng, -1.0, 1.0);
  return v;
}

// Reassociation drift bound: scale tolerance by the absolute-value mass.
double dot_tolerance(const std::vector<double>& a, const std::vector<double>& b) {
  double mass = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) mass += std::abs(a[i] * b[i]);
  return 1e-12 * mass;
}

}  // namespace

TEST_CASE("scalar dot matches hand values") {
  const std::vector<double> a = {1.0, 2.0, 3.0};
  const std::vector<double> b = {4.0, -5.0, 6.0};
  CHECK(k::scalar::dot(a.data(), b.data(), 3) == doctest::Approx(12.0));
  CHECK(k::scalar::dot(a.data(), b.data(), 0) == 0.0);
}

TEST_CASE("scalar axpy and accumulate agree with direct evaluation") {
  std::vector<double> y = {1.0, 1.0, 1.0};
  const std::vector<double> x = {2.0, 0.0, -4.0};
  k::scalar::axpy(0.5, x.data(), y.data(), 3);
  CHECK(y == std::vector<double>{2.0, 1.0, -1.0});

  const std::vector<double> rows = {1, 0, 0, 1};  // 2x2
  const std::vector<double> coef = {3.0, 5.0};
  std::vector<double> acc = {0.0, 1.0};
  k::scalar::accumulate_weighted_rows(rows.data(), 2, 2, coef.data(), acc.data());
  CHECK(acc == std::vector<double>{3.0, 6.0});
}

#if defined(FRESHREC_KERNELS_AVX2_BUILT)
TEST_CASE("avx2 variants match the scalar reference") {
  if (!k::backend_supported(k::Backend::avx2)) {
    MESSAGE("avx2 not supported on this cpu; skipping");
    return;
  }
  std::mt19937_64 rng = substream(7, "kernel-equivalence");
  // Sizes cover every vector tail path, plus large inputs.
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 12u, 31u, 64u,
                        100u, 1000u, 4096u}) {
    const auto a = random_vec(rng, n);
    const auto b = random_vec(rng, n);
    const double expect = k::scalar::dot(a.data(), b.data(), n);
    const double got = k::avx2::dot(a.data(), b.data(), n);
    CHECK(std::abs(expect - got) <= dot_tolerance(a, b));

    auto y_ref = random_vec(rng, n);
    auto y_simd = y_ref;
    k::scalar::axpy(0.37, a.data(), y_ref.data(), n);
    k::avx2::axpy(0.37, a.data(), y_simd.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(y_simd[i] == doctest::Approx(y_ref[i]).epsilon(1e-12));
    }
  }

  for (std::size_t width : {3u, 8u, 13u}) {
    for (std::size_t n_rows : {1u, 2u, 17u, 200u}) {
      const auto rows = random_vec(rng, n_rows * width);
      const auto v = random_vec(rng, width);
      std::vector<double> out_ref(n_rows), out_simd(n_rows);
      k::scalar::matvec(rows.data(), n_rows, width, v.data(), out_ref.data());
      k::avx2::matvec(rows.data(), n_rows, width, v.data(), out_simd.data());
      for (std::size_t i = 0; i < n_rows; ++i) {
        CHECK(out_simd[i] == doctest::Approx(out_ref[i]).epsilon(1e-11));
      }

      const auto coef = random_vec(rng, n_rows);
      std::vector<double> acc_ref(width, 0.25), acc_simd(width, 0.25);
      k::scalar::accumulate_weighted_rows(rows.data(), n_rows, width,
                                          coef.data(), acc_ref.data());
      k::avx2::accumulate_weighted_rows(rows.data(), n_rows, width,
                                        coef.data(), acc_simd.data());
      for (std::size_t i = 0; i < width; ++i) {
        CHECK(acc_simd[i] == doctest::Approx(acc_ref[i]).epsilon(1e-11));
      }
    }
  }
}
#endif

TEST_CASE("dispatch can be forced to scalar and back") {
  const k::Backend original = k::active_backend();
  k::force_backend(k::Backend::scalar);
  CHECK(k::active_backend() == k::Backend::scalar);
  const std::vector<double> a = {1.0, 2.0};
  CHECK(k::dot(a.data(), a.data(), 2) == doctest::Approx(5.0));
  k::force_backend(original);
  CHECK(k::active_backend() == original);
}

TEST_CASE("backend names are stable") {
  CHECK(k::backend_name(k::Backend::scalar) == "scalar");
  CHECK(k::backend_name(k::Backend::avx2) == "avx2");
  CHECK(k::backend_name(k::Backend::neon) == "neon");
  CHECK(k::backend_supported(k::Backend::scalar));
}
