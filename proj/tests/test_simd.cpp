#include "tracelab/simd.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace tracelab::simd;

TEST_CASE("AVX2 kernels match the scalar reference") {
  const Kernels* avx = avx2_kernels();
  if (!avx || !cpu_has_avx2()) {
    MESSAGE("AVX2 unavailable; only the scalar path is exercised");
    return;
  }
  const Kernels& ref = scalar_kernels();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 31u, 32u, 33u, 1000u, 100003u}) {
    CAPTURE(n);
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = u(rng);
    for (auto& v : y) v = u(rng);

    double scale = 0;
    for (std::size_t i = 0; i < n; ++i) scale += std::fabs(x[i] * y[i]);
    CHECK(std::fabs(avx->dot(x.data(), y.data(), n) - ref.dot(x.data(), y.data(), n)) <= 1e-13 * (scale + 1));

    std::vector<double> a1(n, 0.25), a2(n, 0.25);
    avx->fma_accumulate(a1.data(), x.data(), y.data(), n);
    ref.fma_accumulate(a2.data(), x.data(), y.data(), n);
    for (std::size_t i = 0; i < n; ++i) REQUIRE(a1[i] == doctest::Approx(a2[i]).epsilon(1e-15));

    double p1[7], p2[7];
    avx->power_sums(x.data(), n, 6, p1);
    ref.power_sums(x.data(), n, 6, p2);
    for (int k = 0; k <= 6; ++k) {
      double mag = 0;
      for (double v : x) mag += std::pow(std::fabs(v), k);
      CHECK(std::fabs(p1[k] - p2[k]) <= 1e-13 * (mag + 1));
    }
  }
}

TEST_CASE("byte histogram is exact on both paths") {
  std::mt19937_64 rng(3);
  for (unsigned bins : {1u, 3u, 5u, 16u, 40u}) {
    for (std::size_t n : {0u, 5u, 32u, 8191u, 300000u}) {
      std::vector<std::uint8_t> data(n);
      for (auto& d : data) d = static_cast<std::uint8_t>(rng() % (bins + 2));
      std::vector<std::uint64_t> expect(bins, 0);
      for (auto d : data)
        if (d < bins) ++expect[d];
      std::vector<std::uint64_t> got(bins, 0);
      scalar_kernels().histogram_u8(data.data(), n, got.data(), bins);
      CHECK(got == expect);
      if (const Kernels* avx = avx2_kernels(); avx && cpu_has_avx2()) {
        std::vector<std::uint64_t> g2(bins, 0);
        avx->histogram_u8(data.data(), n, g2.data(), bins);
        CHECK(g2 == expect);
      }
    }
  }
}

TEST_CASE("dispatch picks a usable variant") {
  const Kernels& k = active();
  double x[3] = {1, 2, 3};
  CHECK(k.dot(x, x, 3) == 14.0);
  MESSAGE("active SIMD variant: " << k.name);
}
