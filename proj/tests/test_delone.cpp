#include "tracelab/delone.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace tracelab;

namespace {

const char* kExampleRule = "A -> ABA; B -> ACA; C -> ABBCBBCBBCBBA; lengths 1 3 13";
const char* kFibonacci = "A -> AB\nB -> A\n";

std::vector<double> coords(const DeloneSegment& s, DeloneSegment::Range r) {
  std::vector<double> out;
  for (std::size_t i = r.begin; i < r.end; ++i) out.push_back(s.coordinate(i));
  return out;
}

// Reference count by scanning coordinates.
std::vector<long> brute_counts(const DeloneSegment& s, double T) {
  std::vector<long> c(s.rule().size(), 0);
  for (std::size_t i = 0; i < s.size(); ++i)
    if (std::fabs(s.coordinate(i)) <= T) ++c[s.label(i)];
  return c;
}

}  // namespace

TEST_CASE("geometric schedule") {
  auto w = geometric_schedule(5.0, 2, 4, 8);
  auto s = w.samples();
  REQUIRE(s.size() == 24);
  CHECK(s.front().T == doctest::Approx(25.0));
  CHECK(s[1].T == doctest::Approx(25.0 * std::pow(5.0, 1.0 / 8)));
  CHECK(w.volume(3.0) == 6.0);
}

TEST_CASE("example segment at T = 5") {
  auto rule = parse_rule(kExampleRule);
  auto seed = admissible_seed(rule, 0, 1);
  auto seg = build_segment(rule, seed, 5);
  auto r = seg.window_range(5);
  CHECK(coords(seg, r) == std::vector<double>{-5, -4, -1, 0, 1, 4, 5});
  CHECK(seg.coordinate(seg.origin()) == 0);
  CHECK(rule.decode(seg.labels().substr(seg.origin(), 3)) == "ABA");
  CHECK(seg.counts(r) == std::vector<long>{5, 2, 0});
  SupertileCounter counter(rule, seed);
  CHECK(counter.counts(5) == std::vector<long>{5, 2, 0});
  SUBCASE("T = 0 counts only the origin") {
    CHECK(seg.counts(seg.window_range(0)) == std::vector<long>{1, 0, 0});
    CHECK(counter.counts(0) == std::vector<long>{1, 0, 0});
  }
  SUBCASE("window beyond the segment is rejected") { CHECK_THROWS(seg.window_range(6)); }
  SUBCASE("csv export") {
    std::ostringstream os;
    write_segment_csv(seg, 5, os);
    CHECK(os.str() == "index,coordinate,label\n-3,-5,A\n-2,-4,B\n-1,-1,A\n0,0,A\n1,1,B\n2,4,A\n3,5,A\n");
  }
}

TEST_CASE("integer lattice") {
  auto rule = parse_rule("A -> AA");
  auto seg = build_segment(rule, admissible_seed(rule, 0, 0), 3);
  CHECK(coords(seg, seg.window_range(3)) == std::vector<double>{-3, -2, -1, 0, 1, 2, 3});
}

TEST_CASE("gaps match labels and stay within tile bounds") {
  for (const char* text : {kExampleRule, kFibonacci}) {
    auto rule = parse_rule(text);
    auto seed = admissible_seed(rule, 0, 0);
    auto seg = build_segment(rule, seed, 2000, 5);
    const auto& len = rule.lengths().approx;
    const double lo = *std::min_element(len.begin(), len.end());
    const double hi = *std::max_element(len.begin(), len.end());
    for (std::size_t i = 0; i + 1 < seg.size(); ++i) {
      const double gap = seg.coordinate(i + 1) - seg.coordinate(i);
      REQUIRE(gap == doctest::Approx(len[seg.label(i)]).epsilon(1e-12));
      REQUIRE(gap >= lo * (1 - 1e-12));
      REQUIRE(gap <= hi * (1 + 1e-12));
    }
  }
}

TEST_CASE("supertile counter agrees with a scanned segment") {
  std::mt19937_64 rng(7);
  for (const char* text : {kExampleRule, kFibonacci}) {
    auto rule = parse_rule(text);
    for (Letter a = 0; a < rule.size(); ++a)
      for (Letter b = 0; b < rule.size(); ++b) {
        Seed seed;
        try {
          seed = admissible_seed(rule, a, b);
        } catch (const RuleError&) {
          continue;
        }
        const double Tmax = 3000;
        auto seg = build_segment(rule, seed, Tmax);
        SupertileCounter counter(rule, seed);
        std::uniform_real_distribution<double> u(0, Tmax);
        for (int t = 0; t < 200; ++t) {
          double T = t < 100 ? std::floor(u(rng)) : u(rng);
          REQUIRE(counter.counts(T) == brute_counts(seg, T));
          REQUIRE(seg.counts(seg.window_range(T)) == brute_counts(seg, T));
        }
      }
  }
}

TEST_CASE("counts are monotone and converge to the frequencies") {
  auto rule = parse_rule(kExampleRule);
  auto seed = admissible_seed(rule, 0, 1);
  SupertileCounter counter(rule, seed);
  std::vector<long> prev(3, 0);
  for (double T = 0; T < 5000; T += 7.5) {
    auto c = counter.counts(T);
    for (int l = 0; l < 3; ++l) CHECK(c[l] >= prev[l]);
    prev = c;
  }
  const double T = std::pow(5.0, 8);
  auto c = counter.counts(T);
  const double f[] = {2.0 / 21, 2.0 / 21, 1.0 / 21};
  for (int l = 0; l < 3; ++l) CHECK(std::fabs(c[l] / (2 * T) - f[l]) < 5e-3);
  // Point count = density * 2T up to a deviation of order T^(log 2 / log 5).
  const double T6 = std::pow(5.0, 6);
  auto c6 = counter.counts(T6);
  const double total = static_cast<double>(c6[0] + c6[1] + c6[2]);
  CHECK(std::fabs(total - 2 * T6 * 5 / 21) < 10 * std::pow(T6, std::log(2) / std::log(5)));
}

TEST_CASE("supertile windows renormalize exactly") {
  auto rule = parse_rule(kExampleRule);
  auto seed = admissible_seed(rule, 0, 1);
  const IntMatrix m = abelianize(rule);
  // The right half starts with sigma^n(A); its length is 5^n.
  auto seg = build_segment(rule, seed, std::pow(5.0, 8), 1);
  std::vector<long> prev = {1, 0, 0};
  for (int n = 1; n <= 8; ++n) {
    auto c = seg.counts(seg.half_open(0, std::pow(5.0, n)));
    CHECK(c == m * prev);
    prev = c;
  }
}

TEST_CASE("local patterns") {
  auto rule = parse_rule(kExampleRule);
  auto seed = admissible_seed(rule, 0, 1);
  auto seg = build_segment(rule, seed, 200);
  auto key = local_pattern(seg, seg.origin(), 4);
  CHECK(key.offsets == std::vector<double>{-4, -1, 0, 1, 4});
  CHECK(rule.decode(key.labels) == "BAABA");
  CHECK(local_pattern(seg, seg.origin(), 0.5).labels == Word(1, '\0'));
  CHECK_THROWS(local_pattern(seg, 0, 30));
  // Equal keys at radius R stay equal at smaller radii.
  const auto o = seg.window_range(150);
  for (std::size_t i = o.begin; i < o.end; ++i)
    for (std::size_t j = i + 1; j < std::min(o.end, i + 40); ++j)
      if (local_pattern(seg, i, 20) == local_pattern(seg, j, 20))
        for (double r : {0.0, 3.0, 13.0}) CHECK(local_pattern(seg, i, r) == local_pattern(seg, j, r));
}

TEST_CASE("boundary collar counts") {
  auto rule = parse_rule(kExampleRule);
  auto seed = admissible_seed(rule, 0, 1);
  const double T = 625;
  auto seg = build_segment(rule, seed, T + 20);
  CHECK(boundary_collar_count(seg, T, 0) <= 2);
  CHECK(boundary_collar_count(seg, T, 13) <= 28);
  std::size_t brute = 0;
  for (std::size_t i = 0; i < seg.size(); ++i) {
    const double x = seg.coordinate(i);
    if (std::fabs(x - T) <= 3 || std::fabs(x + T) <= 3) ++brute;
  }
  CHECK(boundary_collar_count(seg, T, 3) == brute);
}
