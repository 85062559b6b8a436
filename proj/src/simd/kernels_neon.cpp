// NEON variants for aarch64 (2-lane float64x2_t).

#include "due/simd/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

namespace due::simd {
namespace {

void add_neon(double* dst, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(dst + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) dst[i] = a[i] + b[i];
}

void sub_neon(double* dst, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(dst + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) dst[i] = a[i] - b[i];
}

void mul_neon(double* dst, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(dst + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) dst[i] = a[i] * b[i];
}

void scale_neon(double* dst, const double* a, double alpha, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(dst + i, vmulq_f64(va, vld1q_f64(a + i)));
  }
  for (; i < n; ++i) dst[i] = alpha * a[i];
}

void axpy_neon(double* dst, const double* x, double alpha, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(dst + i, vfmaq_f64(vld1q_f64(dst + i), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) dst[i] += alpha * x[i];
}

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  }
  double r = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

double sum_neon(const double* a, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(a + i));
  double r = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) r += a[i];
  return r;
}

double sqdist_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double r = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    r += d * d;
  }
  return r;
}

void matmul_nn_neon(double* c, const double* a, const double* b, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double avs = a[i * k + p];
      const float64x2_t av = vdupq_n_f64(avs);
      const double* brow = b + p * n;
      std::size_t j = 0;
      for (; j + 2 <= n; j += 2) {
        vst1q_f64(crow + j, vfmaq_f64(vld1q_f64(crow + j), av, vld1q_f64(brow + j)));
      }
      for (; j < n; ++j) crow[j] += avs * brow[j];
    }
  }
}

void matmul_tn_neon(double* c, const double* a, const double* b, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double avs = arow[i];
      const float64x2_t av = vdupq_n_f64(avs);
      double* crow = c + i * n;
      std::size_t j = 0;
      for (; j + 2 <= n; j += 2) {
        vst1q_f64(crow + j, vfmaq_f64(vld1q_f64(crow + j), av, vld1q_f64(brow + j)));
      }
      for (; j < n; ++j) crow[j] += avs * brow[j];
    }
  }
}

void matmul_nt_neon(double* c, const double* a, const double* b, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      c[i * n + j] += dot_neon(arow, b + j * k, k);
    }
  }
}

}  // namespace

const Kernels* neon_kernels() {
  static const Kernels table = {
      "neon",         add_neon,       sub_neon,       mul_neon,
      scale_neon,     axpy_neon,      dot_neon,       sum_neon,
      sqdist_neon,    matmul_nn_neon, matmul_tn_neon, matmul_nt_neon,
  };
  return &table;
}

}  // namespace due::simd

#else

namespace due::simd {
const Kernels* neon_kernels() { return nullptr; }
}  // namespace due::simd

#endif
