#include "tracelab/simd.hpp"

#include <vector>

namespace tracelab::simd {
namespace {

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void fma_accumulate(double* acc, const double* x, const double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += x[i] * y[i];
}

void histogram_u8(const std::uint8_t* data, std::size_t n, std::uint64_t* counts, unsigned bins) {
  for (std::size_t i = 0; i < n; ++i)
    if (data[i] < bins) ++counts[data[i]];
}

void power_sums(const double* x, std::size_t n, unsigned max_power, double* out) {
  for (unsigned k = 0; k <= max_power; ++k) out[k] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double p = 1.0;
    for (unsigned k = 0; k <= max_power; ++k) {
      out[k] += p;
      p *= x[i];
    }
  }
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{Isa::kScalar, "scalar", dot, fma_accumulate, histogram_u8, power_sums};
  return k;
}

}  // namespace tracelab::simd
