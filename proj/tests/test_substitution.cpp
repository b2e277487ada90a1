#include "tracelab/eigen_structure.hpp"
#include "tracelab/substitution.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace tracelab;

namespace {

const char* kExampleRule = "A -> ABA; B -> ACA; C -> ABBCBBCBBCBBA; lengths 1 3 13";
const char* kFibonacci = "A -> AB\nB -> A\n";

Rational q(long p, long d = 1) { return Rational(p) / d; }

}  // namespace

TEST_CASE("parse_rule accepts the three-letter example") {
  auto rule = parse_rule(kExampleRule);
  REQUIRE(rule.size() == 3);
  CHECK(rule.decode(rule.image(2)) == "ABBCBBCBBCBBA");
  REQUIRE(rule.lengths().exact);
  CHECK(*rule.lengths().exact == RationalVector{q(1), q(3), q(13)});
  CHECK(rule.lengths_given());
}

TEST_CASE("parse_rule defaults and errors") {
  SUBCASE("single letter periodic rule gets unit length") {
    auto rule = parse_rule("A -> AA");
    REQUIRE(rule.lengths().exact);
    CHECK((*rule.lengths().exact)[0] == 1);
  }
  SUBCASE("Fibonacci default lengths solve theta M = phi theta") {
    auto rule = parse_rule(kFibonacci);
    const double phi = (1 + std::sqrt(5.0)) / 2;
    CHECK_FALSE(rule.lengths().exact);
    CHECK(rule.lengths().approx[0] == doctest::Approx(phi).epsilon(1e-12));
    CHECK(rule.lengths().approx[1] == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("unknown letter in image") {
    CHECK_THROWS_AS(parse_rule("A -> AB"), RuleError);
  }
  SUBCASE("empty image reports its line") {
    try {
      parse_rule("A -> AB\nB ->\n");
      FAIL("expected RuleError");
    } catch (const RuleError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("lengths that are not a left eigenvector") {
    CHECK_THROWS_AS(parse_rule("A -> ABA; B -> ACA; C -> ABBCBBCBBCBBA; lengths 1 1 1"), RuleError);
  }
  SUBCASE("comments are ignored") {
    auto rule = parse_rule("# header\nA -> AB # tail\nB -> A\n");
    CHECK(rule.size() == 2);
  }
}

TEST_CASE("abelianize counts letters column by column") {
  auto m = abelianize(parse_rule(kExampleRule));
  long expected[3][3] = {{2, 2, 2}, {1, 0, 8}, {0, 1, 3}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(m(i, j) == expected[i][j]);

  auto poly = characteristic_polynomial(to_rational(m));
  // (x - 5)(x + 2)(x - 2) = x^3 - 5x^2 - 4x + 20
  CHECK(poly == RationalVector{q(20), q(-4), q(-5), q(1)});

  CHECK(abelianize(parse_rule("A -> AA"))(0, 0) == 2);
  auto fib = abelianize(parse_rule(kFibonacci));
  CHECK(fib(0, 0) == 1);
  CHECK(fib(0, 1) == 1);
  CHECK(fib(1, 0) == 1);
  CHECK(fib(1, 1) == 0);
}

TEST_CASE("abelianization is a homomorphism on random words") {
  auto rule = parse_rule(kExampleRule);
  auto m = abelianize(rule);
  std::mt19937 gen(7);
  std::uniform_int_distribution<int> letter(0, 2), length(0, 50);
  for (int trial = 0; trial < 1000; ++trial) {
    Word w;
    for (int n = length(gen); n > 0; --n) w.push_back(static_cast<char>(letter(gen)));
    auto lhs = abelianize_word(substitute_word(rule, w), 3);
    auto rhs = m * abelianize_word(w, 3);
    REQUIRE(lhs == rhs);
  }
}

TEST_CASE("check_primitive") {
  auto p = check_primitive(abelianize(parse_rule(kExampleRule)));
  CHECK(p.primitive);
  CHECK(p.witness_power == 2);
  CHECK_FALSE(check_primitive(IntMatrix::identity(2)).primitive);
  auto fib = check_primitive(abelianize(parse_rule(kFibonacci)));
  CHECK(fib.primitive);
  CHECK(fib.witness_power == 2);
}

TEST_CASE("check_proper") {
  CHECK(check_proper(parse_rule(kExampleRule)));
  CHECK_FALSE(check_proper(parse_rule(kFibonacci)));
  CHECK(check_proper(parse_rule("A -> AA")));
}

TEST_CASE("substitute_word") {
  auto rule = parse_rule(kExampleRule);
  CHECK(rule.decode(substitute_word(rule, rule.encode("AB"))) == "ABAACA");
  CHECK(substitute_word(rule, Word()).empty());
  CHECK(rule.decode(substitute_word(rule, rule.encode("C"))) == "ABBCBBCBBCBBA");
}

TEST_CASE("generate_fixed_word") {
  auto rule = parse_rule(kExampleRule);
  auto seed = admissible_seed(rule, rule.letter("A"), rule.letter("B"));
  CHECK(seed.power == 1);
  CHECK(generate_fixed_word(rule, seed, 0).render(rule) == "A.B");
  CHECK(generate_fixed_word(rule, seed, 2).render(rule) == "ABAACAABA.ABAABBCBBCBBCBBAABA");

  auto depth2 = generate_fixed_word(rule, seed, 2);
  auto depth3 = generate_fixed_word(rule, seed, 3);
  CHECK(depth3.left == substitute_word(rule, depth2.left));
  CHECK(depth3.right == substitute_word(rule, depth2.right));

  SUBCASE("nesting around the origin for a nesting seed") {
    auto nest = admissible_seed(rule, rule.letter("A"), rule.letter("A"));
    for (unsigned n = 0; n <= 8; ++n) {
      auto a = generate_fixed_word(rule, nest, n);
      auto b = generate_fixed_word(rule, nest, n + 1);
      REQUIRE(b.right.compare(0, a.right.size(), a.right) == 0);
      REQUIRE(b.left.compare(b.left.size() - a.left.size(), a.left.size(), a.left) == 0);
    }
  }
  SUBCASE("limit word is approached by the seed words") {
    // sigma^n(B) starts with sigma^(n-1)(A), the prefix of the limit word.
    Word limit = limit_right(rule, seed, 200);
    Word d5 = generate_fixed_word(rule, seed, 5).right;
    CHECK(d5.compare(0, 100, limit, 0, 100) == 0);
    CHECK(rule.decode(limit.substr(0, 9)) == "ABAACAABA");
    Word left = limit_left(rule, seed, 9);
    CHECK(rule.decode(left) == "ABAACAABA");
  }
  SUBCASE("lazy prefix and suffix agree with full expansion") {
    Word full = substitute_power(rule, Word(1, 1), 5);
    CHECK(expand_prefix(rule, 1, 5, 100) == full.substr(0, 100));
    CHECK(expand_suffix(rule, 1, 5, 100) == full.substr(full.size() - 100));
    CHECK(expand_prefix(rule, 1, 5, 1u << 30) == full);
  }
}

TEST_CASE("non-proper seeds nest under a power") {
  auto rule = parse_rule(kFibonacci);
  auto seed = admissible_seed(rule, rule.letter("A"), rule.letter("A"));
  CHECK(seed.power == 2);
  auto w = generate_fixed_word(rule, seed, 1);
  CHECK(rule.decode(w.left) == "ABA");
  CHECK(rule.decode(w.right) == "ABA");
  CHECK_THROWS_AS(admissible_seed(rule, rule.letter("B"), rule.letter("B")), RuleError);
}

TEST_CASE("legal words") {
  auto rule = parse_rule(kFibonacci);
  auto two = legal_words(rule, 2);
  CHECK(two.size() == 3);  // AA, AB, BA
  auto three = legal_words(rule, 3);
  CHECK(three.size() == 4);  // complexity n + 1
  auto rule6 = parse_rule(kExampleRule);
  CHECK(legal_words(rule6, 3).size() == 11);
}

TEST_CASE("perron_data") {
  SUBCASE("three-letter example is exact") {
    auto d = perron_data(parse_rule(kExampleRule));
    REQUIRE(d.expansion.exact);
    CHECK(*d.expansion.exact == 5);
    REQUIRE(d.frequencies.exact);
    CHECK(*d.frequencies.exact == RationalVector{q(2, 21), q(2, 21), q(1, 21)});
    CHECK(*d.density.exact == q(5, 21));
    // theta M = nu theta exactly
    auto m = abelianize(parse_rule(kExampleRule));
    for (int col = 0; col < 3; ++col) {
      Rational s = 0;
      for (int row = 0; row < 3; ++row) s += (*d.lengths.exact)[row] * m(row, col);
      CHECK(s == 5 * (*d.lengths.exact)[col]);
    }
  }
  SUBCASE("integer lattice") {
    auto d = perron_data(parse_rule("A -> AA"));
    CHECK(*d.expansion.exact == 2);
    CHECK(*d.density.exact == 1);
  }
  SUBCASE("Fibonacci in floating point") {
    auto d = perron_data(parse_rule(kFibonacci));
    const double phi = (1 + std::sqrt(5.0)) / 2;
    CHECK_FALSE(d.expansion.exact);
    CHECK(d.expansion.approx == doctest::Approx(phi).epsilon(1e-12));
    double norm = d.frequencies.approx[0] * d.lengths.approx[0] + d.frequencies.approx[1] * d.lengths.approx[1];
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
    // f is proportional to (phi, 1) as well, so density = (phi + 1) / (phi^2 + 1)
    CHECK(d.density.approx == doctest::Approx((phi + 1) / (phi * phi + 1)).epsilon(1e-12));
    CHECK(d.frequencies.approx[0] > 0);
    CHECK(d.frequencies.approx[1] > 0);
  }
  SUBCASE("non-primitive rule") {
    CHECK_THROWS_AS(perron_data(parse_rule("A -> A; B -> B")), RuleError);
  }
}

TEST_CASE("eigen_structure of the three-letter example") {
  auto es = eigen_structure(abelianize(parse_rule(kExampleRule)));
  REQUIRE(es.exact);
  REQUIRE(es.eigenvalues.size() == 3);
  CHECK(*es.eigenvalues[0].exact == 5);
  CHECK(*es.eigenvalues[1].exact == -2);
  CHECK(*es.eigenvalues[2].exact == 2);
  REQUIRE(es.basis.size() == 3);
  CHECK(*es.basis[0].vector.exact == RationalVector{q(1), q(3), q(13)});
  CHECK(*es.basis[1].vector.exact == RationalVector{q(1), q(-4), q(6)});
  CHECK(*es.basis[2].vector.exact == RationalVector{q(-1), q(0), q(2)});
  CHECK(es.plus_indices().size() == 3);
  for (const auto& b : es.basis) {
    CHECK(b.strict);
    CHECK(b.log_power == 0);
  }
  CHECK(es.basis[1].exponent == doctest::Approx(std::log(2.0) / std::log(5.0)));
  // currents are the dual basis
  CHECK(*es.currents[1].exact == RationalVector{q(1, 14), q(-5, 28), q(1, 28)});
  CHECK(*es.currents[2].exact == RationalVector{q(-5, 6), q(-1, 12), q(1, 12)});
}

TEST_CASE("eigen_structure of Fibonacci") {
  auto es = eigen_structure(abelianize(parse_rule(kFibonacci)));
  const double phi = (1 + std::sqrt(5.0)) / 2;
  CHECK_FALSE(es.exact);
  CHECK(es.eigenvalues[0].value.real() == doctest::Approx(phi));
  CHECK(es.eigenvalues[1].value.real() == doctest::Approx(-1 / phi));
  auto plus = es.plus_indices();
  REQUIRE(plus.size() == 1);
  CHECK(plus[0] == EigenIndex{1, 1, 1});
}

TEST_CASE("eigen_structure finds a Jordan block") {
  IntMatrix m(2, 2, 0);
  m(0, 0) = 2;
  m(0, 1) = 1;
  m(1, 1) = 2;
  auto es = eigen_structure(m);
  REQUIRE(es.basis.size() == 2);
  CHECK(es.basis[0].index == EigenIndex{1, 1, 1});
  CHECK(es.basis[1].index == EigenIndex{1, 2, 1});
  CHECK(es.basis[1].log_power == 1);
  // M^T eta_2 = 2 eta_2 + eta_1
  auto mt = to_rational(m.transpose());
  auto lhs = mt * *es.basis[1].vector.exact;
  for (int r = 0; r < 2; ++r) CHECK(lhs[r] == 2 * (*es.basis[1].vector.exact)[r] + (*es.basis[0].vector.exact)[r]);
}

TEST_CASE("eigen_structure with unit-modulus and complex eigenvalues") {
  // diag(3) (+) rotation by 90 degrees scaled: eigenvalues 3, +-i
  IntMatrix m(3, 3, 0);
  m(0, 0) = 3;
  m(1, 2) = -1;
  m(2, 1) = 1;
  auto es = eigen_structure(m);
  REQUIRE(es.basis.size() == 3);
  CHECK(es.basis[1].index == EigenIndex{2, 1, 1});
  CHECK(es.basis[2].index == EigenIndex{2, 1, 2});
  CHECK(es.basis[1].in_plus);
  CHECK_FALSE(es.basis[1].strict);
  CHECK(es.basis[1].log_power == 1);
  REQUIRE(es.currents.size() == 3);
}

TEST_CASE("eigen residuals in floating mode") {
  auto rule = parse_rule("A -> ABC; B -> AC; C -> BA");
  auto m = abelianize(rule);
  auto es = eigen_structure(m);
  auto mt = m.transpose();
  for (const auto& b : es.basis) {
    if (!b.eigenvalue.is_real() || b.eigenvalue.exact) continue;
    double nu = b.eigenvalue.value.real();
    double sup = 0, err = 0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      double s = 0;
      for (std::size_t c = 0; c < m.cols(); ++c) s += static_cast<double>(mt(r, c)) * b.vector.approx[c];
      err = std::max(err, std::fabs(s - nu * b.vector.approx[r]));
      sup = std::max(sup, std::fabs(b.vector.approx[r]));
    }
    CHECK(err <= 1e-9 * sup);
  }
}
