#include "cagnet/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "kernels_impl.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <cpuid.h>
#endif

namespace cagnet::kernels {

namespace scalar_impl {

double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void vadd(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void vmul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

}  // namespace scalar_impl

#ifndef CAGNET_HAVE_AVX2_TU
// Built without the AVX2 TU: keep the dispatcher linkable.
namespace avx2_impl {
double dot(const double* a, const double* b, std::size_t n) {
  return scalar_impl::dot(a, b, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  scalar_impl::axpy(alpha, x, y, n);
}
void vadd(const double* a, const double* b, double* out, std::size_t n) {
  scalar_impl::vadd(a, b, out, n);
}
void vmul(const double* a, const double* b, double* out, std::size_t n) {
  scalar_impl::vmul(a, b, out, n);
}
}  // namespace avx2_impl
#endif

bool cpu_has_avx2() {
#ifndef CAGNET_HAVE_AVX2_TU
  return false;
#elif defined(__x86_64__) || defined(__i386__)
  unsigned eax, ebx, ecx, edx;
  if (__get_cpuid_max(0, nullptr) < 7) return false;
  __cpuid_count(7, 0, eax, ebx, ecx, edx);
  return (ebx & (1u << 5)) != 0;
#else
  return false;
#endif
}

namespace {

Backend pick_default() {
  if (const char* env = std::getenv("CAGNET_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Backend::Avx2;
  }
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& backend_slot() {
  static std::atomic<Backend> slot{pick_default()};
  return slot;
}

}  // namespace

Backend active_backend() { return backend_slot().load(std::memory_order_relaxed); }

const char* backend_name(Backend b) {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

bool set_backend(Backend b) {
  if (b == Backend::Avx2 && !cpu_has_avx2()) return false;
  backend_slot().store(b, std::memory_order_relaxed);
  return true;
}

double dot(const double* a, const double* b, std::size_t n) {
  if (active_backend() == Backend::Avx2) return avx2_impl::dot(a, b, n);
  return scalar_impl::dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  if (active_backend() == Backend::Avx2) return avx2_impl::axpy(alpha, x, y, n);
  scalar_impl::axpy(alpha, x, y, n);
}

void vadd(const double* a, const double* b, double* out, std::size_t n) {
  if (active_backend() == Backend::Avx2) return avx2_impl::vadd(a, b, out, n);
  scalar_impl::vadd(a, b, out, n);
}

void vmul(const double* a, const double* b, double* out, std::size_t n) {
  if (active_backend() == Backend::Avx2) return avx2_impl::vmul(a, b, out, n);
  scalar_impl::vmul(a, b, out, n);
}

void matvec(const double* W, const double* x, double* y,
            std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] += dot(W + r * cols, x, cols);
}

void matvec_t(const double* W, const double* dy, double* dx,
              std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(dy[r], W + r * cols, dx, cols);
}

void ger(double* W, const double* dy, const double* x,
         std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(dy[r], x, W + r * cols, cols);
}

}  // namespace cagnet::kernels
