#include "tracelab/classes.hpp"

#include <doctest.h>

#include <random>

using namespace tracelab;

namespace {

const char* kExampleRule = "A -> ABA; B -> ACA; C -> ABBCBBCBBCBBA; lengths 1 3 13";

std::shared_ptr<const Language> example() {
  static auto lang = std::make_shared<const Language>(parse_rule(kExampleRule));
  return lang;
}

const EigenStructure& structure() {
  static EigenStructure es = eigen_structure(abelianize(example()->rule()));
  return es;
}

Rational q(long p, long d) { return Rational(p) / d; }

Rational tau(const ClassVector& cls, int i) {
  auto v = cls.exact_coordinate(structure(), EigenIndex{i, 1, 1});
  REQUIRE(v.has_value());
  return *v;
}

}  // namespace

TEST_CASE("laplacian class") {
  auto cls = diagonal_class(kernels::laplacian<Rational>(example()), structure());
  REQUIRE(cls.base.exact);
  CHECK(*cls.base.exact == RationalVector{1, 1, 1});
  CHECK(tau(cls, 1) == q(5, 21));
}

TEST_CASE("current table from projections") {
  const Rational expected[3][3] = {{q(2, 21), q(2, 21), q(1, 21)},
                                   {q(1, 14), q(-5, 28), q(1, 28)},
                                   {q(-5, 6), q(-1, 12), q(1, 12)}};
  for (Letter l = 0; l < 3; ++l) {
    auto cls = diagonal_class(kernels::projection<Rational>(example(), l), structure());
    for (int i = 1; i <= 3; ++i) CHECK(tau(cls, i) == expected[i - 1][l]);
  }
}

TEST_CASE("example operator class") {
  auto cls = diagonal_class(kernels::h0<Rational>(example()), structure());
  CHECK(tau(cls, 1) == 0);
  CHECK(tau(cls, 2) == q(-1, 14));
  CHECK(tau(cls, 3) == q(-5, 6));
}

TEST_CASE("class is stable under collar extension") {
  auto lap = kernels::laplacian<Rational>(example());
  auto va = kernels::projection<Rational>(example(), 0);
  auto prod = convolve(lap, convolve(va, lap));
  REQUIRE(prod.radius() >= 1);
  auto a = diagonal_class(prod, structure());
  auto b = diagonal_class(prod.extended(prod.hop(), prod.radius() + 1), structure());
  REQUIRE(a.alpha.exact);
  REQUIRE(b.alpha.exact);
  CHECK(*a.alpha.exact == *b.alpha.exact);
  CHECK(a.spectrum_separated);
  CHECK(b.spectrum_separated);
}

TEST_CASE("class projections are linear") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    auto a = random_kernel<Rational>(example(), 1, 1, rng);
    auto b = random_kernel<Rational>(example(), 1, 1, rng);
    const Rational s = q(trial - 4, 3);
    auto ca = diagonal_class(a, structure());
    auto cb = diagonal_class(b, structure());
    auto cab = diagonal_class(a + s * b, structure());
    for (std::size_t i = 0; i < 3; ++i) CHECK((*cab.alpha.exact)[i] == (*ca.alpha.exact)[i] + s * (*cb.alpha.exact)[i]);
  }
}

TEST_CASE("squared laplacian has a computable class") {
  auto lap = kernels::laplacian<Rational>(example());
  auto sq = convolve(lap, lap);
  auto cls = diagonal_class(sq, structure());
  // diagonal of the square is 1 + 1/4 + 1/4 at every point
  CHECK(tau(cls, 1) == q(3, 2) * q(5, 21));
  CHECK(tau(cls, 2) == q(3, 2) * (q(1, 14) - q(5, 28) + q(1, 28)));
}

TEST_CASE("letter-only diagonals have no collared part") {
  auto cls = diagonal_class(kernels::h0<Rational>(example()).extended(1, 2), structure());
  for (const auto& x : *cls.collared_only.exact) CHECK(x == 0);
}

TEST_CASE("floating path matches exact path") {
  auto h = kernels::h0<double>(example());
  auto cls = diagonal_class(h, structure());
  CHECK(cls.coordinate(structure(), {2, 1, 1}) == doctest::Approx(-1.0 / 14).epsilon(1e-12));
  CHECK(cls.coordinate(structure(), {3, 1, 1}) == doctest::Approx(-5.0 / 6).epsilon(1e-12));
}
