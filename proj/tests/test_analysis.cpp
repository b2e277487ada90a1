#include "tracelab/analysis.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace tracelab;

namespace {

const char* kExampleRule = "A -> ABA; B -> ACA; C -> ABBCBBCBBCBBA; lengths 1 3 13";

const TraceContext& example() {
  static auto rule = parse_rule(kExampleRule);
  static TraceContext ctx(rule, admissible_seed(rule, 0, 1));
  return ctx;
}

const TraceContext& lattice() {
  static auto rule = parse_rule("A -> AA");
  static TraceContext ctx(rule, admissible_seed(rule, 0, 0));
  return ctx;
}

const TraceContext& fibonacci() {
  static auto rule = parse_rule("A -> AB; B -> A");
  static TraceContext ctx(rule, admissible_seed(rule, 0, 0));
  return ctx;
}

EquivariantKernel<Rational> lap(const TraceContext& c) { return kernels::laplacian<Rational>(c.language()); }
EquivariantKernel<Rational> h0() { return kernels::h0<Rational>(example().language()); }

Rational q(long p, long d) { return Rational(p) / d; }

Rational tau_of(const EquivariantKernel<Rational>& k, EigenIndex index) {
  auto cls = diagonal_class(k, example().structure());
  auto t = tau_exact(cls, example().structure(), index);
  REQUIRE(t.exact);
  return *t.exact;
}

}  // namespace

TEST_CASE("exact tau values") {
  CHECK(tau_of(lap(example()), {1, 1, 1}) == q(5, 21));
  CHECK(tau_of(h0(), {1, 1, 1}) == 0);
  CHECK(tau_of(h0(), {2, 1, 1}) == q(-1, 14));
  CHECK(tau_of(h0(), {3, 1, 1}) == q(-5, 6));
  CHECK(tau_of(kernels::projection<Rational>(example().language(), 1), {2, 1, 1}) == q(-5, 28));
}

TEST_CASE("tau is linear") {
  std::mt19937_64 rng(3);
  const auto& es = example().structure();
  for (int trial = 0; trial < 5; ++trial) {
    auto a = random_kernel<Rational>(example().language(), 2, 1, rng);
    auto b = random_kernel<Rational>(example().language(), 1, 2, rng);
    const Rational s = q(trial + 1, 5);
    auto ta = tau_values(diagonal_class(a, es));
    auto tb = tau_values(diagonal_class(b, es));
    auto tab = tau_values(diagonal_class(a + s * b, es));
    for (std::size_t i = 0; i < ta.size(); ++i) CHECK(*tab[i].exact == *ta[i].exact + s * *tb[i].exact);
  }
}

TEST_CASE("subtraction order and I+") {
  auto order = subtraction_order(example().structure());
  REQUIRE(order.size() == 3);
  CHECK(order[0] == EigenIndex{1, 1, 1});
  CHECK(order[1] == EigenIndex{2, 1, 1});
  CHECK(order[2] == EigenIndex{3, 1, 1});
  CHECK(subtraction_order(fibonacci().structure()).size() == 1);
  CHECK(subtraction_order(lattice().structure()).size() == 1);
}

TEST_CASE("window traces by counting") {
  WindowTrace t(example(), lap(example()), {0, 1});
  CHECK(t.counting());
  for (double T : {10.0, 1000.0, 100000.0}) {
    const auto n = example().counter().counts(T);
    CHECK(*t(T).exact == n[0] + n[1] + n[2]);
  }
  // two evaluation paths for the example operator at T = 5^4
  WindowTrace th(example(), h0(), {0, 1});
  auto seg = example().segment(625.0, 2);
  CHECK(*th(625.0).exact == windowed_diagonal_sum(h0(), *seg, 625.0));
}

TEST_CASE("deviation series of the laplacian") {
  auto fam = geometric_schedule(5.0, 2, 8, 4);
  WindowTrace t(example(), lap(example()), {0, 1});
  auto series = deviation_series(example(), t, fam, EigenIndex{2, 1, 1});
  REQUIRE(series.indices.size() == 2);
  const std::size_t k = series.slot({2, 1, 1});
  double sup = 0.0;
  for (const auto& row : series.rows) {
    // index (1,1,1) carries the raw trace
    CHECK(row.remainder[0] == row.raw.approx);
    const double expected = row.raw.approx - (5.0 / 21.0) * example().pairings(row.sample.T)[0].approx;
    CHECK(row.remainder[k] == doctest::Approx(expected).epsilon(1e-12));
    sup = std::max(sup, std::abs(row.normalized[k]));
  }
  CHECK(sup < 10.0);
}

TEST_CASE("example operator remainder is its raw trace") {
  auto fam = geometric_schedule(5.0, 2, 7, 3);
  WindowTrace t(example(), h0(), {0, 1});
  auto series = deviation_series(example(), t, fam, EigenIndex{2, 1, 1});
  for (const auto& row : series.rows) CHECK(row.remainder[1] == row.raw.approx);
}

TEST_CASE("periodic remainder is bounded") {
  auto fam = geometric_schedule(2.0, 2, 14, 4);
  WindowTrace t(lattice(), kernels::identity<Rational>(lattice().language()), {0, 1});
  for (const auto& s : fam.samples()) {
    const double rem = t(s.T).approx - 2.0 * s.T;  // points at the integers, density 1
    CHECK(std::abs(rem) <= 1.0 + 1e-9);
  }
}

TEST_CASE("schedule too short") {
  WindowTrace t(example(), h0(), {0, 1});
  CHECK_THROWS_AS(deviation_series(example(), t, geometric_schedule(5.0, 2, 4, 2)), AnalysisError);
}

TEST_CASE("limsup estimates") {
  auto fam = geometric_schedule(5.0, 1, 10, 8);
  WindowTrace t(example(), h0(), {0, 1});
  auto series = deviation_series(example(), t, fam);
  auto est = limsup_estimate(series, {3, 1, 1});
  CHECK(est.value == doctest::Approx(5.0 / 6.0).epsilon(0.15));
  CHECK(est.stabilized);

  WindowTrace tl(example(), lap(example()), {0, 1});
  auto lead = limsup_estimate(deviation_series(example(), tl, fam), {1, 1, 1}, Convention::kUnitLimsup);
  CHECK(std::abs(lead.value - 5.0 / 21.0) / (5.0 / 21.0) <= 1e-3);

  WindowTrace tz(example(), kernels::zero<Rational>(example().language()), {0, 1});
  auto zs = deviation_series(example(), tz, fam);
  for (const auto& idx : zs.indices) CHECK(limsup_estimate(zs, idx).value == 0.0);
}

TEST_CASE("psi profiles") {
  auto fam = geometric_schedule(5.0, 2, 9, 4);
  auto p1 = psi_profile(example(), {1, 1, 1}, fam);
  for (std::size_t i = 0; i < p1.psi.size(); ++i) CHECK(std::abs(p1.psi[i] - 1.0) <= 13.0 / p1.samples[i].T);
  auto p2 = psi_profile(example(), {2, 1, 1}, fam);
  bool pos = false, neg = false;
  for (double v : p2.psi) (v > 0 ? pos : neg) = true;
  CHECK(pos);
  CHECK(neg);
  CHECK(p2.running_sup.back() == doctest::Approx(p2.running_sup[p2.running_sup.size() - 5]).epsilon(0.2));
  CHECK_THROWS_AS(psi_profile(lattice(), {2, 1, 1}, geometric_schedule(2.0, 1, 5, 1)), AnalysisError);
}

TEST_CASE("exponent fits") {
  auto fam = geometric_schedule(5.0, 3, 10, 8);
  WindowTrace t(example(), h0(), {0, 1});
  std::vector<WindowSample> s;
  std::vector<double> raw, lead;
  for (const auto& x : fam.samples()) {
    s.push_back(x);
    raw.push_back(t(x.T).approx);
    lead.push_back(example().pairings(x.T)[0].approx);
  }
  CHECK(fit_exponent(s, raw).slope == doctest::Approx(std::log(2.0) / std::log(5.0)).epsilon(0.05 / 0.43068));
  CHECK(fit_exponent(s, lead).slope == doctest::Approx(1.0).epsilon(0.01));
  std::vector<double> zeros(s.size(), 0.0);
  CHECK_THROWS_AS(fit_exponent(s, zeros), AnalysisError);

  const double nu = fibonacci().structure().basis[0].eigenvalue.modulus();
  WindowTrace ft(fibonacci(), lap(fibonacci()), {0, 1});
  auto series = deviation_series(fibonacci(), ft, geometric_schedule(nu, 3, 20, 8));
  std::vector<WindowSample> fs;
  std::vector<double> rem;
  for (const auto& row : series.rows) {
    fs.push_back(row.sample);
    rem.push_back(row.raw.approx - series.tau[0].approx * fibonacci().pairings(row.sample.T)[0].approx);
  }
  CHECK(fit_exponent(fs, rem).slope <= 0.05);
}

TEST_CASE("ids curves") {
  auto seg = lattice().segment(2.0, 2);
  auto curve = ids_curve(kernels::laplacian<double>(lattice().language()), *seg, 2.0);
  REQUIRE(curve.eigenvalues.size() == 5);
  for (int k = 1; k <= 5; ++k) CHECK(curve.eigenvalues[k - 1] == doctest::Approx(1.0 - std::cos(k * M_PI / 6.0)));
  CHECK(curve.moments[1] * curve.volume == doctest::Approx(5.0));
  CHECK(curve.moments[2] * curve.volume == doctest::Approx(7.0));
  CHECK(curve(-0.1) == 0.0);
  CHECK(curve(10.0) == doctest::Approx(5.0 / 4.0));

  auto eseg = example().segment(3125.0, 2);
  auto va = ids_curve(kernels::projection<double>(example().language(), 0), *eseg, 100.0);
  for (double l : va.eigenvalues) CHECK((std::abs(l) < 1e-12 || std::abs(l - 1.0) < 1e-12));
  auto hc = ids_curve(kernels::h0<double>(example().language()), *eseg, 3125.0);
  CHECK(hc.mass() == doctest::Approx(5.0 / 21.0).epsilon(1e-2));
  for (std::size_t i = 1; i < hc.eigenvalues.size(); ++i) CHECK(hc.eigenvalues[i - 1] <= hc.eigenvalues[i]);

  CHECK_THROWS_AS(ids_curve(kernels::right_shift<double>(example().language()), *eseg, 10.0), AnalysisError);
}

TEST_CASE("shubin convergence") {
  auto fam = geometric_schedule(5.0, 3, 9, 4);
  auto report = shubin_check(example(), lap(example()), {0, 1}, fam);
  CHECK(*report.tau1.exact == q(5, 21));
  CHECK(report.fit.slope == doctest::Approx(report.expected_slope).epsilon(0.1 / 0.5693));

  // integer windows: tr(lap^2) = (3/2) N - 1/2 with N = 2T + 1
  auto periodic = shubin_check(lattice(), lap(lattice()), {0, 0, 1}, geometric_schedule(2.0, 4, 14, 1));
  CHECK(periodic.fit.slope == doctest::Approx(-1.0).epsilon(0.01));
  CHECK(periodic.rows.back().gap == doctest::Approx(1.0 / (2.0 * periodic.rows.back().sample.T)));
}

TEST_CASE("constant polynomial") {
  // rho_T(1) differs from the density only by the boundary count
  auto report = shubin_check(lattice(), lap(lattice()), {1}, geometric_schedule(2.0, 2, 10, 3));
  CHECK(*report.tau1.exact == 1);
  for (const auto& row : report.rows) CHECK(row.gap <= 1.0 / (2.0 * row.sample.T) + 1e-15);
}

TEST_CASE("refined shubin") {
  auto fam = geometric_schedule(5.0, 1, 8, 8);
  auto r = refined_shubin_check(example(), h0(), {0, 1}, {3, 1, 1}, fam);
  WindowTrace t(example(), h0(), {0, 1});
  auto direct = limsup_estimate(deviation_series(example(), t, fam), {3, 1, 1});
  CHECK(r.estimate.value == direct.value);
  CHECK(*r.expected.exact == q(-5, 6));

  auto sq = refined_shubin_check(example(), h0(), {0, 0, 1}, {2, 1, 1}, geometric_schedule(5.0, 1, 6, 4));
  auto h2 = convolve(h0(), h0());
  CHECK(*sq.expected.exact == tau_of(h2, {2, 1, 1}));
  CHECK(std::isfinite(sq.estimate.value));
}

TEST_CASE("commutator traces") {
  auto fam = geometric_schedule(5.0, 1, 6, 3);
  auto same = commutator_trace_test(example(), lap(example()), lap(example()), fam);
  CHECK(same.exact_zero);
  auto va = kernels::projection<Rational>(example().language(), 0);
  auto mixed = commutator_trace_test(example(), lap(example()), va, fam);
  CHECK(mixed.bounded());
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    auto a = random_kernel<Rational>(example().language(), 1 + trial % 3, trial % 2, rng);
    auto b = random_kernel<Rational>(example().language(), 1 + (trial + 1) % 3, 1, rng);
    auto rep = commutator_trace_test(example(), a, b, fam);
    CHECK(rep.bounded());
    CHECK(commutator_trace_test(example(), a, a, fam).exact_zero);
  }
}

TEST_CASE("restriction against algebra") {
  auto fam = geometric_schedule(5.0, 1, 6, 3);
  for (const auto& a : {lap(example()), h0()}) {
    auto rep = restriction_vs_algebra(example(), a, {0, 0, 1}, fam);
    CHECK(rep.bounded());
    CHECK(rep.max_abs > 0.0);
  }
}
