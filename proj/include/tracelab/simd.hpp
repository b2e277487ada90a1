#pragma once

#include <cstddef>
#include <cstdint>

// Floating-point and byte-counting inner loops. Each routine has a scalar
// reference and an AVX2/FMA variant; the variant is picked once at startup
// from CPUID, overridable with TRACE_LAB_SIMD=scalar|avx2.

namespace tracelab::simd {

enum class Isa { kScalar, kAvx2 };

struct Kernels {
  Isa isa;
  const char* name;
  double (*dot)(const double* x, const double* y, std::size_t n);
  // acc[i] += x[i] * y[i]
  void (*fma_accumulate)(double* acc, const double* x, const double* y, std::size_t n);
  // counts[b] += #{i : data[i] == b} for b < bins; other values are ignored.
  void (*histogram_u8)(const std::uint8_t* data, std::size_t n, std::uint64_t* counts, unsigned bins);
  // out[k] = sum_i x[i]^k for k = 0 .. max_power
  void (*power_sums)(const double* x, std::size_t n, unsigned max_power, double* out);
};

const Kernels& scalar_kernels();
// nullptr when the build has no AVX2 variant.
const Kernels* avx2_kernels();

bool cpu_has_avx2();
const Kernels& active();

}  // namespace tracelab::simd
