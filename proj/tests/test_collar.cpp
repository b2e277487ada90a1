#include "tracelab/collar.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace tracelab;

namespace {

const char* kExampleRule = "A -> ABA; B -> ACA; C -> ABBCBBCBBCBBA; lengths 1 3 13";

Rational q(long p, long d = 1) { return Rational(p) / d; }

}  // namespace

TEST_CASE("radius zero collar is the base rule") {
  auto rule = parse_rule(kExampleRule);
  auto c = collar(rule, 0);
  REQUIRE(c.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(c.center(i) == i);
  CHECK(c.matrix() == abelianize(rule));
}

TEST_CASE("periodic rule has one collared letter") {
  auto rule = parse_rule("A -> AA");
  auto c = collar(rule, 1);
  REQUIRE(c.size() == 1);
  CHECK(c.word(0) == Word(3, '\0'));
  CHECK(c.matrix()(0, 0) == 2);
}

TEST_CASE("example collars: size, projection law, Perron value, frequencies") {
  auto rule = parse_rule(kExampleRule);
  const IntMatrix m = abelianize(rule);
  const std::size_t sizes[] = {3, 11, 21, 33};
  for (unsigned r = 1; r <= 3; ++r) {
    CAPTURE(r);
    auto c = collar(rule, r);
    CHECK(c.size() == sizes[r]);
    // Projecting collared images letterwise gives the base images.
    for (std::size_t x = 0; x < c.size(); ++x) {
      Word projected;
      for (std::size_t y : c.images()[x]) projected.push_back(static_cast<char>(c.center(y)));
      CHECK(projected == rule.image(c.center(x)));
    }
    const IntMatrix p = c.projection_matrix();
    CHECK(p * c.matrix() == m * p);
    CHECK(check_primitive(c.matrix()).primitive);
    auto nu = perron_eigenvalue(c.matrix());
    REQUIRE(nu.exact);
    CHECK(*nu.exact == 5);
    auto f = c.frequencies();
    REQUIRE(f.exact);
    RationalVector pushed(3, q(0));
    for (std::size_t x = 0; x < c.size(); ++x) {
      CHECK(sgn((*f.exact)[x]) > 0);
      pushed[c.center(x)] += (*f.exact)[x];
    }
    CHECK(pushed == RationalVector{q(2, 21), q(2, 21), q(1, 21)});
  }
}

TEST_CASE("collared alphabet matches the factors of a deep fixed word") {
  auto rule = parse_rule(kExampleRule);
  auto c = collar(rule, 1);
  auto seed = admissible_seed(rule, 0, 1);
  auto w = generate_fixed_word(rule, seed, 6);
  Word all = w.left + w.right;
  std::set<Word> seen;
  for (std::size_t i = 0; i + 3 <= all.size(); ++i) seen.insert(all.substr(i, 3));
  CHECK(std::vector<Word>(seen.begin(), seen.end()) == c.alphabet());
}

TEST_CASE("Fibonacci collar keeps the golden Perron value") {
  auto rule = parse_rule("A -> AB\nB -> A\n");
  auto c = collar(rule, 2);
  auto f = c.frequencies();
  auto base = perron_data(rule);
  std::vector<double> pushed(2, 0.0);
  for (std::size_t x = 0; x < c.size(); ++x) pushed[c.center(x)] += f.approx[x];
  CHECK(pushed[0] == doctest::Approx(base.frequencies.approx[0]).epsilon(1e-12));
  CHECK(pushed[1] == doctest::Approx(base.frequencies.approx[1]).epsilon(1e-12));
  CHECK(perron_eigenvalue(c.matrix()).approx == doctest::Approx((1 + std::sqrt(5.0)) / 2).epsilon(1e-12));
}
