#include <doctest.h>

#include <cstring>
#include <vector>

#include "cagnet/kernels.hpp"
#include "cagnet/rng.hpp"

using namespace cagnet;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

struct BackendGuard {
  kernels::Backend saved = kernels::active_backend();
  ~BackendGuard() { kernels::set_backend(saved); }
};

}  // namespace

TEST_CASE("scalar and avx2 kernels are bit-identical") {
  if (!kernels::cpu_has_avx2()) return;  // nothing to compare on this CPU
  BackendGuard guard;
  Rng rng(7);
  std::vector<std::size_t> sizes = {1, 2, 3, 4, 5, 7, 8, 15, 16, 17,
                                    31, 33, 63, 64, 65, 127, 257, 1000};
  for (std::size_t n : sizes) {
    auto a = random_vec(rng, n);
    auto b = random_vec(rng, n);
    auto y0 = random_vec(rng, n);

    kernels::set_backend(kernels::Backend::Scalar);
    const double dot_s = kernels::dot(a.data(), b.data(), n);
    auto axpy_s = y0;
    kernels::axpy(1.7, a.data(), axpy_s.data(), n);
    std::vector<double> add_s(n), mul_s(n);
    kernels::vadd(a.data(), b.data(), add_s.data(), n);
    kernels::vmul(a.data(), b.data(), mul_s.data(), n);

    kernels::set_backend(kernels::Backend::Avx2);
    const double dot_v = kernels::dot(a.data(), b.data(), n);
    auto axpy_v = y0;
    kernels::axpy(1.7, a.data(), axpy_v.data(), n);
    std::vector<double> add_v(n), mul_v(n);
    kernels::vadd(a.data(), b.data(), add_v.data(), n);
    kernels::vmul(a.data(), b.data(), mul_v.data(), n);

    CHECK(std::memcmp(&dot_s, &dot_v, sizeof(double)) == 0);
    CHECK(bit_equal(axpy_s, axpy_v));
    CHECK(bit_equal(add_s, add_v));
    CHECK(bit_equal(mul_s, mul_v));
  }
}

TEST_CASE("matvec family matches per backend bit for bit") {
  if (!kernels::cpu_has_avx2()) return;
  BackendGuard guard;
  Rng rng(11);
  for (auto [rows, cols] : std::vector<std::pair<std::size_t, std::size_t>>{
           {1, 1}, {3, 5}, {8, 8}, {16, 33}, {64, 64}, {5, 128}}) {
    auto W = random_vec(rng, rows * cols);
    auto x = random_vec(rng, cols);
    auto dy = random_vec(rng, rows);

    kernels::set_backend(kernels::Backend::Scalar);
    std::vector<double> y_s(rows, 0.0), dx_s(cols, 0.0);
    auto Wg_s = std::vector<double>(rows * cols, 0.0);
    kernels::matvec(W.data(), x.data(), y_s.data(), rows, cols);
    kernels::matvec_t(W.data(), dy.data(), dx_s.data(), rows, cols);
    kernels::ger(Wg_s.data(), dy.data(), x.data(), rows, cols);

    kernels::set_backend(kernels::Backend::Avx2);
    std::vector<double> y_v(rows, 0.0), dx_v(cols, 0.0);
    auto Wg_v = std::vector<double>(rows * cols, 0.0);
    kernels::matvec(W.data(), x.data(), y_v.data(), rows, cols);
    kernels::matvec_t(W.data(), dy.data(), dx_v.data(), rows, cols);
    kernels::ger(Wg_v.data(), dy.data(), x.data(), rows, cols);

    CHECK(bit_equal(y_s, y_v));
    CHECK(bit_equal(dx_s, dx_v));
    CHECK(bit_equal(Wg_s, Wg_v));
  }
}

TEST_CASE("dot agrees with a long-double reference within tolerance") {
  Rng rng(3);
  for (std::size_t n : {4u, 17u, 256u}) {
    auto a = random_vec(rng, n);
    auto b = random_vec(rng, n);
    long double ref = 0.0;
    for (std::size_t i = 0; i < n; ++i) ref += (long double)a[i] * b[i];
    CHECK(kernels::dot(a.data(), b.data(), n) ==
          doctest::Approx((double)ref).epsilon(1e-12));
  }
}

TEST_CASE("backend selection is sticky and reports support") {
  BackendGuard guard;
  CHECK(kernels::set_backend(kernels::Backend::Scalar));
  CHECK(kernels::active_backend() == kernels::Backend::Scalar);
  if (kernels::cpu_has_avx2()) {
    CHECK(kernels::set_backend(kernels::Backend::Avx2));
    CHECK(kernels::active_backend() == kernels::Backend::Avx2);
  } else {
    CHECK_FALSE(kernels::set_backend(kernels::Backend::Avx2));
  }
}
