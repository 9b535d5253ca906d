#pragma once

#include <cstddef>

// Double-precision inner loops shared by the numeric core. Every kernel has a
// scalar reference implementation and, on x86-64, an AVX2 variant selected at
// runtime. Both paths evaluate reductions in the same fixed order (four
// stride-4 accumulator lanes, combined as (s0+s1)+(s2+s3), sequential tail),
// so results are bit-identical regardless of the active backend. FMA is never
// used.
namespace cagnet::kernels {

enum class Backend { Scalar, Avx2 };

// Returns the backend currently in use.
Backend active_backend();
const char* backend_name(Backend b);

// Force a backend. Returns false (and leaves the selection unchanged) if the
// CPU does not support it. Intended for tests and the CAGNET_KERNELS=scalar
// environment override honored on first use.
bool set_backend(Backend b);

bool cpu_has_avx2();

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);

// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

// out[i] = a[i] + b[i] / out[i] = a[i] * b[i]
void vadd(const double* a, const double* b, double* out, std::size_t n);
void vmul(const double* a, const double* b, double* out, std::size_t n);

// y[r] += dot(W[r,:], x) for row-major W of shape rows x cols.
void matvec(const double* W, const double* x, double* y,
            std::size_t rows, std::size_t cols);

// dx[c] += sum_r W[r,c] * dy[r]  (transpose product, accumulating)
void matvec_t(const double* W, const double* dy, double* dx,
              std::size_t rows, std::size_t cols);

// W[r,c] += dy[r] * x[c]  (rank-1 update, accumulating)
void ger(double* W, const double* dy, const double* x,
         std::size_t rows, std::size_t cols);

}  // namespace cagnet::kernels
