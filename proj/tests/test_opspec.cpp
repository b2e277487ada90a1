#include "tracelab/opspec.hpp"

#include <doctest.h>

using namespace tracelab;

namespace {

std::shared_ptr<const Language> example() {
  static auto lang =
      std::make_shared<const Language>(parse_rule("A -> ABA; B -> ACA; C -> ABBCBBCBBCBBA; lengths 1 3 13"));
  return lang;
}

std::shared_ptr<const Language> lattice() {
  static auto lang = std::make_shared<const Language>(parse_rule("A -> AA"));
  return lang;
}

Rational q(long p, long d) { return Rational(p) / d; }

}  // namespace

TEST_CASE("builtins compile") {
  auto lap = compile_operator("laplacian", example());
  CHECK(same_operator(lap, kernels::laplacian<Rational>(example())));
  for (std::size_t c = 0; c < lap.contexts(); ++c) {
    CHECK(lap.at(c, 0) == 1);
    CHECK(lap.at(c, 1) == q(-1, 2));
  }
  auto pa = compile_operator("proj(A)", example());
  CHECK(pa.hop() == 0);
  CHECK(pa.at(0, 0) == 1);
  CHECK(pa.at(1, 0) == 0);
  CHECK(same_operator(compile_operator("h0", example()), kernels::h0<Rational>(example())));
  CHECK(same_operator(compile_operator("adj(right_shift)", example()), kernels::left_shift<Rational>(example())));
}

TEST_CASE("hamiltonian is literal") {
  auto h = compile_operator("hamiltonian(-2/21, -2/21, -1/21)", example());
  CHECK(h.at(0, 0) == q(19, 21));
  CHECK(h.at(2, 0) == q(20, 21));
  auto sum = compile_operator("H = laplacian + (-2/21)*proj(A) + (-2/21)*proj(B) - 1/21*proj(C)", example());
  CHECK(same_operator(h, sum));
}

TEST_CASE("arithmetic") {
  auto a = compile_operator("2*laplacian - 1", example());
  CHECK(a.at(0, 0) == 1);
  CHECK(a.at(0, -1) == -1);
  auto sq = compile_operator("laplacian^2", lattice());
  REQUIRE(sq.hop() == 2);
  CHECK(sq.at(0, 0) == q(3, 2));
  CHECK(sq.at(0, 1) == -1);
  CHECK(sq.at(0, 2) == q(1, 4));
  CHECK(same_operator(sq, compile_operator("laplacian*laplacian", lattice())));
  CHECK(same_operator(sq, compile_operator("poly(laplacian, 0, 0, 1)", lattice())));
  CHECK(compile_operator("proj(A)*proj(B)", example()).is_zero());
  CHECK(same_operator(compile_operator("laplacian/2", example()), compile_operator("0.5*laplacian", example())));
  CHECK(compile_operator("-(1/3)^2", example()).at(0, 0) == q(-1, 9));
}

TEST_CASE("assignments and statements") {
  auto k = compile_operator("V = proj(A) - proj(C); W = 2*V\nW + V", example());
  CHECK(k.at(0, 0) == 3);
  CHECK(k.at(2, 0) == -3);
  auto last = compile_operator("X = proj(B) # comment\n", example());
  CHECK(last.at(1, 0) == 1);
}

TEST_CASE("custom tables") {
  const char* text =
      "table K radius 1 hop 1\n"
      "  ABA: -1/2 1 0.25\n"
      "  BBC: 0 2 0\n"
      "end\n"
      "K";
  auto k = compile_operator(text, example());
  const auto& t = example()->contexts(1);
  const auto aba = t.find(Word{0, 1, 0});
  const auto bab = t.find(Word{1, 1, 2});
  REQUIRE(aba != ContextTable::npos);
  REQUIRE(bab != ContextTable::npos);
  REQUIRE(k.radius() == 1);
  CHECK(k.at(aba, -1) == q(-1, 2));
  CHECK(k.at(aba, 1) == q(1, 4));
  CHECK(k.at(bab, 0) == 2);
}

TEST_CASE("errors carry line numbers") {
  try {
    compile_operator("X = laplacian\nY = proj(Q)", example());
    FAIL("expected an error");
  } catch (const OperatorError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(compile_operator("laplacian +", example()), OperatorError);
  CHECK_THROWS_AS(compile_operator("frobnicate", example()), OperatorError);
  CHECK_THROWS_AS(compile_operator("hamiltonian(1, 2)", example()), OperatorError);
  CHECK_THROWS_AS(compile_operator("laplacian / laplacian", example()), OperatorError);
  CHECK_THROWS_AS(compile_operator("table K radius 1 hop 0\n CCC: 1\nend", example()), OperatorError);
  CHECK_THROWS_AS(compile_operator("table K radius 1 hop 0\n ABA: 1\n", example()), OperatorError);
  CHECK_THROWS_AS(compile_operator("", example()), OperatorError);
}
