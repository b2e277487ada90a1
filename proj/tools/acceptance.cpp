// Runs every acceptance criterion and prints one PASS/FAIL line each.
// Exit code 0 when all pass, 1 otherwise.

#include "tracelab/analysis.hpp"
#include "tracelab/reports.hpp"
#include "tracelab/restricted.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <random>
#include <string>
#include <vector>

using namespace tracelab;

namespace {

const char* kExampleRule = "A -> ABA; B -> ACA; C -> ABBCBBCBBCBBA; lengths 1 3 13";
const double kSlope = std::log(2.0) / std::log(5.0);

struct Outcome {
  bool pass = false;
  std::string detail;
};

const TraceContext& example() {
  static auto rule = parse_rule(kExampleRule);
  static TraceContext ctx(rule, admissible_seed(rule, 0, 1));
  return ctx;
}

EquivariantKernel<Rational> lap() { return kernels::laplacian<Rational>(example().language()); }
EquivariantKernel<Rational> h0() { return kernels::h0<Rational>(example().language()); }

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Outcome golden() {
  auto t0 = std::chrono::steady_clock::now();
  auto rows = verify_example();
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string failed;
  for (const auto& r : rows)
    if (!r.pass) failed += " " + r.name;
  Outcome o;
  o.pass = failed.empty() && sec < 1.0;
  o.detail = std::to_string(rows.size()) + " constants exact, " + fmt("%.3f s", sec);
  if (!failed.empty()) o.detail += ", mismatched:" + failed;
  return o;
}

Outcome trace_counts() {
  const auto& ctx = example();
  WindowTrace t(ctx, lap(), {0, 1});
  Outcome o{true, ""};
  auto lap_d = kernels::laplacian<Rational>(ctx.language());
  for (double T : {10.0, 1e3, 1e5}) {
    long count = 0;
    for (long c : ctx.counter().counts(T)) count += c;
    const Real tr = t(T);
    auto seg = ctx.segment(T, 2);
    const Rational diag = windowed_diagonal_sum(lap_d, *seg, T);
    const bool ok = tr.exact && *tr.exact == Rational(count) && diag == Rational(count);
    o.pass = o.pass && ok;
    o.detail += fmt("T=%g: %.0f points", T, static_cast<double>(count)) + (ok ? "; " : " MISMATCH; ");
  }
  return o;
}

Outcome deviation_exponent() {
  auto t0 = std::chrono::steady_clock::now();
  auto fam = geometric_schedule(5.0, 3, 10, 8);
  WindowTrace t(example(), h0(), {0, 1});
  std::vector<WindowSample> s;
  std::vector<double> raw;
  for (const auto& x : fam.samples()) {
    s.push_back(x);
    raw.push_back(t(x.T).approx);
  }
  const double slope = fit_exponent(s, raw).slope;
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::fabs(slope - kSlope) <= 0.05 && sec <= 60.0 && t.counting(),
          fmt("slope %.4f (target %.5f +- 0.05), %.2f s", slope, kSlope, sec)};
}

Outcome shubin() {
  auto fam = geometric_schedule(5.0, 3, 10, 8);
  const double target = kSlope - 1.0;
  Outcome o{true, ""};
  const std::vector<std::pair<const char*, RationalPolynomial>> phis = {{"x", {0, 1}}, {"x^2", {0, 0, 1}}};
  for (const auto& [name, phi] : phis) {
    auto r = shubin_check(example(), lap(), phi, fam, std::pow(5.0, 9));
    const bool ok = r.tau1.exact && std::fabs(r.fit.slope - target) <= 0.1 && r.cross_check_relative < 1e-3;
    o.pass = o.pass && ok;
    o.detail += std::string(name) + ": " +
                fmt("tau1 %.6f slope %.4f cross-check rel %.3g", r.tau1.approx, r.fit.slope, r.cross_check_relative) +
                (ok ? "; " : " OUT; ");
  }
  return o;
}

Outcome refined() {
  auto r = refined_shubin_check(example(), h0(), {0, 1}, {3, 1, 1}, geometric_schedule(5.0, 1, 10, 8));
  const auto& ps = r.estimate.per_scale;
  const double change = std::fabs(ps[ps.size() - 1] - ps[ps.size() - 2]) / std::fabs(ps[ps.size() - 2]);
  return {change <= 0.1 && r.relative_error <= 0.15,
          fmt("estimate %.6f vs |tau_3(H0)| %.6f (rel err %.3g), change n=9..10 %.3g", r.estimate.value,
              std::fabs(r.expected.approx), r.relative_error, change)};
}

Outcome commutators() {
  auto fam = geometric_schedule(5.0, 1, 8, 3);
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<unsigned> hop(1, 3), radius(0, 1);
  const auto& lang = example().language();
  int bounded = 0, zero = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    auto a = random_kernel<Rational>(lang, hop(rng), radius(rng), rng);
    auto b = random_kernel<Rational>(lang, hop(rng), radius(rng), rng);
    auto rep = commutator_trace_test(example(), a, b, fam);
    if (rep.bounded()) ++bounded;
    if (rep.budget > 0) worst = std::max(worst, rep.max_abs / rep.budget);
    if (commutator_trace_test(example(), a, a, fam).exact_zero) ++zero;
  }
  return {bounded == 100 && zero == 100,
          fmt("%.0f/100 bounded (worst %.3f of budget), %.0f/100 exact zero for a = b", bounded, worst, zero)};
}

Outcome restriction() {
  auto fam = geometric_schedule(5.0, 1, 8, 4);
  Outcome o{true, ""};
  const std::vector<std::pair<const char*, EquivariantKernel<Rational>>> ops = {{"laplacian", lap()}, {"h0", h0()}};
  const std::vector<std::pair<const char*, RationalPolynomial>> phis = {{"x^2", {0, 0, 1}}, {"x^3", {0, 0, 0, 1}}};
  for (const auto& [an, a] : ops)
    for (const auto& [pn, phi] : phis) {
      auto r = restriction_vs_algebra(example(), a, phi, fam);
      o.pass = o.pass && r.bounded();
      o.detail += std::string(an) + " " + pn + fmt(": %.3g <= %.4g", r.max_abs, r.budget) + (r.bounded() ? "; " : " OVER; ");
    }
  return o;
}

Outcome fibonacci() {
  auto rule = parse_rule("A -> AB; B -> A");
  TraceContext ctx(rule, admissible_seed(rule, 0, 0));
  int plus = 0;
  for (const auto& b : ctx.structure().basis) plus += b.in_plus ? 1 : 0;
  const double nu = ctx.structure().basis[0].eigenvalue.modulus();
  WindowTrace t(ctx, kernels::laplacian<Rational>(ctx.language()), {0, 1});
  auto series = deviation_series(ctx, t, geometric_schedule(nu, 3, 20, 8));
  std::vector<WindowSample> s;
  std::vector<double> rem;
  double worst = 0.0;
  for (const auto& row : series.rows) {
    s.push_back(row.sample);
    rem.push_back(row.raw.approx - series.tau[0].approx * ctx.pairings(row.sample.T)[0].approx);
    worst = std::max(worst, std::fabs(rem.back()));
  }
  const double slope = fit_exponent(s, rem).slope;
  return {plus == 1 && slope <= 0.05, fmt("|I+| = %.0f, remainder slope %.4f, max |remainder| %.3g", plus, slope, worst)};
}

Outcome supertiles() {
  auto rule = parse_rule(kExampleRule);
  const IntMatrix m = abelianize(rule);
  auto seg = build_segment(rule, admissible_seed(rule, 0, 1), std::pow(5.0, 8), 1);
  std::vector<long> prev = {1, 0, 0};
  int exact = 0;
  for (int n = 1; n <= 8; ++n) {
    auto c = seg.counts(seg.half_open(0, std::pow(5.0, n)));
    if (c == m * prev) ++exact;
    prev = c;
  }
  return {exact == 8, fmt("%.0f/8 levels satisfy N(sigma^n A) = M N(sigma^(n-1) A)", exact)};
}

Outcome algebra() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<unsigned> hop(0, 3), radius(0, 1);
  const auto& lang = example().language();
  int laws = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto a = random_kernel<Rational>(lang, hop(rng), radius(rng), rng);
    auto b = random_kernel<Rational>(lang, hop(rng), radius(rng), rng);
    auto c = random_kernel<Rational>(lang, hop(rng), radius(rng), rng);
    const Rational s = Rational(trial - 50) / 7;
    bool ok = same_operator(convolve(convolve(a, b), c), convolve(a, convolve(b, c)));
    ok = ok && same_operator(convolve(a, b + c), convolve(a, b) + convolve(a, c));
    ok = ok && same_operator(convolve(s * a, b), s * convolve(a, b));
    ok = ok && same_operator(adjoint(adjoint(a)), a);
    ok = ok && same_operator(adjoint(convolve(a, b)), convolve(adjoint(b), adjoint(a)));
    ok = ok && same_operator(adjoint(a + b), adjoint(a) + adjoint(b));
    if (ok) ++laws;
  }
  const double T = 625;
  auto seg = example().segment(T, 8);
  std::vector<EquivariantKernel<double>> ops = {kernels::laplacian<double>(lang), kernels::h0<double>(lang)};
  for (int i = 0; i < 3; ++i) {
    auto r = random_kernel<double>(lang, 2, 1, rng);
    ops.push_back(r + adjoint(r));
  }
  double worst = 0.0;
  for (const auto& k : ops) {
    auto mat = restrict_kernel(k, *seg, T);
    for (int power = 0; power <= 4; ++power) {
      std::vector<double> coef(power + 1, 0.0);
      coef[power] = 1;
      auto pt = poly_trace_restricted(mat, coef);
      worst = std::max(worst, pt.power ? pt.relative_gap : 1.0);
    }
  }
  return {laws == 100 && worst <= 1e-9,
          fmt("%.0f/100 kernel triples satisfy every law exactly; moment gap %.3g (m <= 4)", laws, worst)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const std::vector<Criterion> criteria = {
      {"golden constants", golden},
      {"laplacian trace equals point count", trace_counts},
      {"deviation exponent", deviation_exponent},
      {"shubin convergence", shubin},
      {"refined shubin (3,1,1)", refined},
      {"commutator traces", commutators},
      {"restriction vs algebra", restriction},
      {"fibonacci negative control", fibonacci},
      {"supertile exactness", supertiles},
      {"algebra laws and moments", algebra},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s %2zu %-36s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(),
                sec);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
