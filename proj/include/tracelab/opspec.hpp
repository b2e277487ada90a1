#pragma once

#include "tracelab/kernel.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tracelab {

class OperatorError : public std::runtime_error {
 public:
  OperatorError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Operator expressions, e.g.
//
//   V = proj(A) - proj(C)
//   H = laplacian + (-2/21)*proj(A) + 1/2*V
//   H^2 - 3*H
//
// Statements are separated by newlines or ';'. Operators: + - * / ^ with
// the usual precedence; '*' between operators is the kernel product,
// a scalar added to an operator means scalar * identity. Builtins:
// laplacian, identity, zero, length, h0, right_shift, left_shift,
// proj(L), hamiltonian(v_1, ..., v_m), adj(X), poly(X, c_0, ..., c_d).
// Custom kernels:
//
//   table K radius 1 hop 1
//     ABA: -1/2 1 -1/2
//     BAB: 0 2 0
//   end
//
// where each row gives a legal context (2r+1 letters) and the values at
// hops -h .. h; unlisted contexts are zero. The result is the last bare
// expression, or the last assignment when there is none.
struct OperatorSpec {
  struct Node;
  using NodePtr = std::shared_ptr<const Node>;
  struct Node {
    enum class Kind { kNumber, kName, kCall, kNegate, kAdd, kSub, kMul, kDiv, kPow };
    Kind kind = Kind::kNumber;
    std::string text;  // number literal, name or function
    std::vector<NodePtr> args;
    int line = 0;
  };
  struct Table {
    std::string name;
    unsigned radius = 0;
    unsigned hop = 0;
    std::vector<std::pair<std::string, std::vector<std::string>>> rows;
    int line = 0;
  };
  struct Statement {
    std::string name;  // empty for a bare expression
    NodePtr expr;
    std::optional<Table> table;
  };
  std::vector<Statement> statements;
  std::string source;
};

OperatorSpec parse_operator(std::string_view text);

EquivariantKernel<Rational> compile(const OperatorSpec& spec, std::shared_ptr<const Language> language);
inline EquivariantKernel<Rational> compile_operator(std::string_view text, std::shared_ptr<const Language> language) {
  return compile(parse_operator(text), std::move(language));
}

// Text of a file when `spec` names a readable file, else `spec` itself.
std::string load_operator_text(const std::string& spec);

}  // namespace tracelab
