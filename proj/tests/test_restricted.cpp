#include "tracelab/restricted.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace tracelab;

namespace {

const char* kExampleRule = "A -> ABA; B -> ACA; C -> ABBCBBCBBCBBA; lengths 1 3 13";

std::shared_ptr<const Language> example() {
  static auto lang = std::make_shared<const Language>(parse_rule(kExampleRule));
  return lang;
}

std::shared_ptr<const Language> lattice() {
  static auto lang = std::make_shared<const Language>(parse_rule("A -> AA"));
  return lang;
}

DeloneSegment segment_for(const Language& lang, double T, std::size_t margin = 8) {
  return build_segment(lang.rule(), admissible_seed(lang.rule(), 0, lang.rule().size() > 1 ? 1 : 0), T, margin);
}

}  // namespace

TEST_CASE("laplacian on the lattice window [-2, 2]") {
  auto seg = segment_for(*lattice(), 2);
  auto m = restrict_kernel(kernels::laplacian<Rational>(lattice()), seg, 2);
  REQUIRE(m.dimension() == 5);
  CHECK(m.hermitian());
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      Rational expect = i == j ? Rational(1) : (i + 1 == j || j + 1 == i ? Rational(-1, 2) : Rational(0));
      CHECK(m.entry(i, j) == expect);
    }
  CHECK(trace_restricted(m) == 5);
  CHECK(poly_trace_power(m, {Rational(1)}) == 5);
  CHECK(poly_trace_power(m, {Rational(0), Rational(0), Rational(1)}) == 7);

  auto md = restrict_kernel(kernels::laplacian<double>(lattice()), seg, 2);
  auto ev = spectrum(md);
  for (int k = 1; k <= 5; ++k) CHECK(ev[k - 1] == doctest::Approx(1 - std::cos(k * M_PI / 6)).epsilon(1e-13));
  auto pt = poly_trace_restricted(md, {0, 0, 1});
  CHECK(pt.eigen == doctest::Approx(7.0).epsilon(1e-13));
  REQUIRE(pt.power);
  CHECK(*pt.power == 7.0);
}

TEST_CASE("diagonal operators follow the labels") {
  auto lang = example();
  auto seg = segment_for(*lang, 60);
  auto vc = restrict_kernel(kernels::projection<Rational>(lang, 2), seg, 21);
  auto range = seg.window_range(21);
  for (std::size_t i = 0; i < vc.dimension(); ++i)
    CHECK(vc.entry(i, i) == (seg.label(range.begin + i) == 2 ? 1 : 0));
  auto h = restrict_kernel(kernels::hamiltonian<Rational>(lang, {1, 2, 3}), seg, 21);
  for (std::size_t i = 0; i < h.dimension(); ++i) CHECK(h.entry(i, i) == 2 + seg.label(range.begin + i));
  CHECK(h.entry(0, 1) == Rational(-1, 2));
}

TEST_CASE("traces equal counts") {
  auto lang = example();
  const double T = 625;
  auto seg = segment_for(*lang, T);
  auto counts = seg.counts(seg.window_range(T));
  auto lap = restrict_kernel(kernels::laplacian<Rational>(lang), seg, T);
  CHECK(trace_restricted(lap) == counts[0] + counts[1] + counts[2]);
  for (Letter l = 0; l < 3; ++l)
    CHECK(trace_restricted(restrict_kernel(kernels::projection<Rational>(lang, l), seg, T)) == counts[l]);
  // H0 two ways: diagonal sum and counts against the diagonal values.
  auto h0 = kernels::h0<Rational>(lang);
  Rational by_counts = 0;
  for (Letter l = 0; l < 3; ++l) by_counts += h0.at(l, 0) * counts[l];
  CHECK(trace_restricted(restrict_kernel(h0, seg, T)) == by_counts);
  CHECK(windowed_diagonal_sum(h0, seg, T) == by_counts);
}

TEST_CASE("moments from eigenvalues match matrix powers") {
  auto lang = example();
  const double T = 625;
  auto seg = segment_for(*lang, T);
  for (auto k : {kernels::laplacian<double>(lang), kernels::h0<double>(lang)}) {
    auto m = restrict_kernel(k, seg, T);
    for (int power = 0; power <= 4; ++power) {
      std::vector<double> c(power + 1, 0.0);
      c[power] = 1;
      auto pt = poly_trace_restricted(m, c);
      REQUIRE(pt.power);
      CHECK(pt.relative_gap <= 1e-9);
    }
  }
}

TEST_CASE("chunked window traces agree with the whole matrix") {
  auto lang = example();
  const double T = 5000;
  auto seg = segment_for(*lang, T, 20);
  std::mt19937_64 rng(9);
  auto a = random_kernel<double>(lang, 2, 1, rng);
  auto sym = a + adjoint(a);
  const std::vector<double> phi = {0.5, -1, 0.25, 2, -0.125};
  auto m = restrict_kernel(sym, seg, T);
  const double whole = poly_trace_power(m, phi);
  const double chunked = windowed_poly_trace(sym, seg, T, phi, 97);
  CHECK(chunked == doctest::Approx(whole).epsilon(1e-11));
}

TEST_CASE("restriction is local and needs context") {
  auto lang = example();
  std::mt19937_64 rng(4);
  auto a = random_kernel<Rational>(lang, 2, 2, rng);
  auto seg = segment_for(*lang, 400);
  auto small = restrict_kernel(a, seg, 200);
  auto big = restrict_kernel(a, seg, 300);
  const std::size_t shift = small.first_point() - big.first_point();
  for (std::size_t i = 2; i + 2 < small.dimension(); ++i)
    for (std::size_t j = i - 2; j <= i + 2; ++j) REQUIRE(small.entry(i, j) == big.entry(i + shift, j + shift));
  auto tight = build_segment(lang->rule(), admissible_seed(lang->rule(), 0, 1), 100, 0);
  CHECK_THROWS_AS(restrict_kernel(a, tight, 100), std::out_of_range);
}

TEST_CASE("polynomial of the kernel versus polynomial of the restriction") {
  auto lang = example();
  auto h = kernels::h0<Rational>(lang);
  const std::vector<Rational> phi = {Rational(1), Rational(-2), Rational(0), Rational(1)};
  auto ph = poly_of_kernel(h, phi);
  auto seg = segment_for(*lang, 800);
  const double T = 300;
  auto inner = restrict_kernel(ph, seg, T);
  auto outer = restrict_kernel(h, seg, T + 3 * 13 + 13);
  Matrix<Rational> o = outer.dense();
  Matrix<Rational> po = evaluate_polynomial(phi, o);
  const std::size_t shift = inner.first_point() - outer.first_point();
  for (std::size_t i = 0; i < inner.dimension(); ++i)
    for (std::size_t j = (i >= 3 ? i - 3 : 0); j < std::min(inner.dimension(), i + 4); ++j)
      REQUIRE(inner.entry(i, j) == po(i + shift, j + shift));
}

TEST_CASE("matrix csv") {
  auto seg = segment_for(*lattice(), 1);
  auto m = restrict_kernel(kernels::laplacian<double>(lattice()), seg, 1);
  std::ostringstream os;
  write_matrix_csv(m, os);
  CHECK(os.str() == "i,j,value\n0,0,1\n0,1,-0.5\n1,0,-0.5\n1,1,1\n1,2,-0.5\n2,1,-0.5\n2,2,1\n");
}
