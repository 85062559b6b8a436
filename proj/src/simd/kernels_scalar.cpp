#include "due/simd/kernels.hpp"

// Reference kernels. These define the semantics the vectorized variants
// are tested against.

namespace due::simd {
namespace {

void add_scalar(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] + b[i];
}

void sub_scalar(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] - b[i];
}

void mul_scalar(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] * b[i];
}

void scale_scalar(double* dst, const double* a, double alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = alpha * a[i];
}

void axpy_scalar(double* dst, const double* x, double alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] += alpha * x[i];
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

double sqdist_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void matmul_nn_scalar(double* c, const double* a, const double* b,
                      std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      const double* brow = b + p * n;
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// a stored [k x m]; c += a^T b
void matmul_tn_scalar(double* c, const double* a, const double* b,
                      std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// b stored [n x k]; c += a b^T. Row-row dot products.
void matmul_nt_scalar(double* c, const double* a, const double* b,
                      std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      c[i * n + j] += dot_scalar(arow, b + j * k, k);
    }
  }
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels table = {
      "scalar",         add_scalar,       sub_scalar,       mul_scalar,
      scale_scalar,     axpy_scalar,      dot_scalar,       sum_scalar,
      sqdist_scalar,    matmul_nn_scalar, matmul_tn_scalar, matmul_nt_scalar,
  };
  return table;
}

}  // namespace due::simd
