#pragma once

#include <cstddef>

// Per-backend entry points. Each TU (scalar here, AVX2 in kernels_avx2.cpp)
// provides the same set under its own namespace; kernels.cpp dispatches.
namespace cagnet::kernels::scalar_impl {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void vadd(const double* a, const double* b, double* out, std::size_t n);
void vmul(const double* a, const double* b, double* out, std::size_t n);
}  // namespace cagnet::kernels::scalar_impl

namespace cagnet::kernels::avx2_impl {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void vadd(const double* a, const double* b, double* out, std::size_t n);
void vmul(const double* a, const double* b, double* out, std::size_t n);
}  // namespace cagnet::kernels::avx2_impl
