#include "tracelab/simd.hpp"

#include <immintrin.h>

#include <algorithm>

namespace tracelab::simd {
namespace {

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
  }
  for (; i + 4 <= n; i += 4) a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void fma_accumulate(double* acc, const double* x, const double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d a = _mm256_loadu_pd(acc + i);
    _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a));
  }
  for (; i < n; ++i) acc[i] += x[i] * y[i];
}

std::uint64_t count_byte(const std::uint8_t* data, std::size_t n, std::uint8_t value) {
  const __m256i needle = _mm256_set1_epi8(static_cast<char>(value));
  const __m256i zero = _mm256_setzero_si256();
  __m256i wide = _mm256_setzero_si256();
  std::size_t i = 0;
  while (i + 32 <= n) {
    // Byte lanes overflow after 255 rounds; flush to 64-bit lanes before that.
    __m256i narrow = _mm256_setzero_si256();
    const std::size_t stop = std::min(n - (n - i) % 32, i + 255 * 32);
    for (; i < stop; i += 32) {
      __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(data + i));
      narrow = _mm256_sub_epi8(narrow, _mm256_cmpeq_epi8(v, needle));
    }
    wide = _mm256_add_epi64(wide, _mm256_sad_epu8(narrow, zero));
  }
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), wide);
  std::uint64_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) total += data[i] == value;
  return total;
}

void histogram_u8(const std::uint8_t* data, std::size_t n, std::uint64_t* counts, unsigned bins) {
  if (bins > 16) {
    scalar_kernels().histogram_u8(data, n, counts, bins);
    return;
  }
  for (unsigned b = 0; b < bins; ++b) counts[b] += count_byte(data, n, static_cast<std::uint8_t>(b));
}

void power_sums(const double* x, std::size_t n, unsigned max_power, double* out) {
  constexpr unsigned kMaxRegs = 16;
  if (max_power >= kMaxRegs) {
    scalar_kernels().power_sums(x, n, max_power, out);
    return;
  }
  __m256d acc[kMaxRegs];
  for (unsigned k = 0; k <= max_power; ++k) acc[k] = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    __m256d p = _mm256_set1_pd(1.0);
    for (unsigned k = 0; k <= max_power; ++k) {
      acc[k] = _mm256_add_pd(acc[k], p);
      p = _mm256_mul_pd(p, v);
    }
  }
  for (unsigned k = 0; k <= max_power; ++k) out[k] = hsum(acc[k]);
  for (; i < n; ++i) {
    double p = 1.0;
    for (unsigned k = 0; k <= max_power; ++k) {
      out[k] += p;
      p *= x[i];
    }
  }
}

}  // namespace

const Kernels* avx2_kernels() {
  static const Kernels k{Isa::kAvx2, "avx2", dot, fma_accumulate, histogram_u8, power_sums};
  return &k;
}

}  // namespace tracelab::simd
