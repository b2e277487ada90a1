#include "tracelab/simd.hpp"

#include <cstdlib>
#include <string_view>

namespace tracelab::simd {

#ifndef TRACELAB_HAVE_AVX2
const Kernels* avx2_kernels() { return nullptr; }
#endif

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const Kernels& choose() {
  const Kernels* avx2 = cpu_has_avx2() ? avx2_kernels() : nullptr;
  if (const char* env = std::getenv("TRACE_LAB_SIMD")) {
    std::string_view want(env);
    if (want == "scalar") return scalar_kernels();
    if (want == "avx2" && avx2) return *avx2;
  }
  return avx2 ? *avx2 : scalar_kernels();
}

}  // namespace

const Kernels& active() {
  static const Kernels& k = choose();
  return k;
}

}  // namespace tracelab::simd
