#pragma once

#include <cstddef>

// Double-precision arithmetic kernels behind the tensor operations.
//
// Every kernel has a scalar reference implementation plus vectorized
// variants (AVX2+FMA on x86-64, NEON on aarch64). The active table is
// chosen once at startup from CPU capabilities and can be overridden
// with the DUE_SIMD environment variable ("scalar", "avx2", "neon").
// Variant tables are also exposed directly so equivalence tests can
// compare them against the scalar reference.

namespace due::simd {

struct Kernels {
  const char* name;

  // dst[i] = a[i] op b[i]
  void (*add)(double* dst, const double* a, const double* b, std::size_t n);
  void (*sub)(double* dst, const double* a, const double* b, std::size_t n);
  void (*mul)(double* dst, const double* a, const double* b, std::size_t n);

  // dst[i] = alpha * a[i]
  void (*scale)(double* dst, const double* a, double alpha, std::size_t n);
  // dst[i] += alpha * x[i]
  void (*axpy)(double* dst, const double* x, double alpha, std::size_t n);

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  // sum_i (a[i] - b[i])^2
  double (*sqdist)(const double* a, const double* b, std::size_t n);

  // Row-major matrix products, accumulating into c (caller zeroes c first).
  // matmul_nn: c[m x n] += a[m x k] * b[k x n]
  // matmul_tn: c[m x n] += a^T * b   with a stored [k x m]
  // matmul_nt: c[m x n] += a * b^T   with b stored [n x k]
  void (*matmul_nn)(double* c, const double* a, const double* b, std::size_t m,
                    std::size_t k, std::size_t n);
  void (*matmul_tn)(double* c, const double* a, const double* b, std::size_t m,
                    std::size_t k, std::size_t n);
  void (*matmul_nt)(double* c, const double* a, const double* b, std::size_t m,
                    std::size_t k, std::size_t n);
};

const Kernels& scalar_kernels();

bool avx2_available();   // compiled in and supported by this CPU
bool neon_available();

// Null when the variant is not compiled in.
const Kernels* avx2_kernels();
const Kernels* neon_kernels();

// The table all tensor operations route through.
const Kernels& active();

}  // namespace due::simd
