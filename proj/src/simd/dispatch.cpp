#include <cstdlib>
#include <cstring>

#include "due/simd/kernels.hpp"

namespace due::simd {

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
  return avx2_kernels() != nullptr && __builtin_cpu_supports("avx2") &&
         __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

bool neon_available() { return neon_kernels() != nullptr; }

namespace {

const Kernels& select() {
  const char* force = std::getenv("DUE_SIMD");
  if (force != nullptr) {
    if (std::strcmp(force, "scalar") == 0) return scalar_kernels();
    if (std::strcmp(force, "avx2") == 0 && avx2_available())
      return *avx2_kernels();
    if (std::strcmp(force, "neon") == 0 && neon_available())
      return *neon_kernels();
    // Unknown or unsupported request: fall through to auto-detection.
  }
  if (avx2_available()) return *avx2_kernels();
  if (neon_available()) return *neon_kernels();
  return scalar_kernels();
}

}  // namespace

const Kernels& active() {
  static const Kernels& chosen = select();
  return chosen;
}

}  // namespace due::simd
