#include "tracelab/opspec.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

namespace tracelab {

namespace {

using Node = OperatorSpec::Node;
using NodePtr = OperatorSpec::NodePtr;
using Kind = Node::Kind;

struct Token {
  enum Type { kNumber, kIdent, kSymbol, kEnd } type = kEnd;
  std::string text;
};

std::vector<Token> tokenize(std::string_view s, int line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      std::size_t j = i;
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
      if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
        if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
          j = k;
          while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        }
      }
      out.push_back({Token::kNumber, std::string(s.substr(i, j - i))});
      i = j;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      out.push_back({Token::kIdent, std::string(s.substr(i, j - i))});
      i = j;
    } else if (std::string_view("+-*/^(),=").find(c) != std::string_view::npos) {
      out.push_back({Token::kSymbol, std::string(1, c)});
      ++i;
    } else {
      throw OperatorError(std::string("unexpected character '") + c + "'", line);
    }
  }
  out.push_back({Token::kEnd, ""});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, int line) : tokens_(std::move(tokens)), line_(line) {}

  NodePtr expression() {
    NodePtr left = term();
    while (peek("+") || peek("-")) {
      Kind k = next().text == "+" ? Kind::kAdd : Kind::kSub;
      left = make(k, "", {left, term()});
    }
    return left;
  }

  bool at_end() const { return tokens_[pos_].type == Token::kEnd; }
  bool peek(const char* symbol) const {
    return tokens_[pos_].type == Token::kSymbol && tokens_[pos_].text == symbol;
  }
  const Token& next() { return tokens_[pos_++]; }
  void expect(const char* symbol) {
    if (!peek(symbol)) throw OperatorError(std::string("expected '") + symbol + "'" + near(), line_);
    ++pos_;
  }
  std::string near() const {
    return at_end() ? " at end of statement" : " near '" + tokens_[pos_].text + "'";
  }

 private:
  NodePtr make(Kind k, std::string text, std::vector<NodePtr> args = {}) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->text = std::move(text);
    n->args = std::move(args);
    n->line = line_;
    return n;
  }

  NodePtr term() {
    NodePtr left = unary();
    while (peek("*") || peek("/")) {
      Kind k = next().text == "*" ? Kind::kMul : Kind::kDiv;
      left = make(k, "", {left, unary()});
    }
    return left;
  }

  NodePtr unary() {
    if (peek("-")) {
      next();
      return make(Kind::kNegate, "", {unary()});
    }
    if (peek("+")) {
      next();
      return unary();
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (peek("^")) {
      next();
      const Token& t = next();
      if (t.type != Token::kNumber || t.text.find_first_not_of("0123456789") != std::string::npos)
        throw OperatorError("exponent must be a nonnegative integer", line_);
      return make(Kind::kPow, t.text, {base});
    }
    return base;
  }

  NodePtr atom() {
    const Token& t = next();
    if (t.type == Token::kNumber) return make(Kind::kNumber, t.text);
    if (t.type == Token::kIdent) {
      if (!peek("(")) return make(Kind::kName, t.text);
      next();
      std::vector<NodePtr> args;
      if (!peek(")")) {
        args.push_back(expression());
        while (peek(",")) {
          next();
          args.push_back(expression());
        }
      }
      expect(")");
      return make(Kind::kCall, t.text, std::move(args));
    }
    if (t.type == Token::kSymbol && t.text == "(") {
      NodePtr e = expression();
      expect(")");
      return e;
    }
    --pos_;
    throw OperatorError("expected a number, name or '('" + near(), line_);
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int line_;
};

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

using Value = std::variant<Rational, EquivariantKernel<Rational>>;

class Compiler {
 public:
  explicit Compiler(std::shared_ptr<const Language> language) : language_(std::move(language)) {}

  EquivariantKernel<Rational> run(const OperatorSpec& spec) {
    std::optional<Value> result;
    std::optional<Value> last_assignment;
    for (const auto& st : spec.statements) {
      if (st.table) {
        auto k = table(*st.table);
        vars_[st.table->name] = k;
        last_assignment = k;
        continue;
      }
      Value v = eval(*st.expr);
      if (st.name.empty()) {
        result = v;
      } else {
        vars_[st.name] = v;
        last_assignment = v;
      }
    }
    if (!result) result = last_assignment;
    if (!result) throw OperatorError("empty operator specification");
    return as_kernel(*result).compact();
  }

 private:
  EquivariantKernel<Rational> as_kernel(const Value& v) const {
    if (auto* k = std::get_if<EquivariantKernel<Rational>>(&v)) return *k;
    return std::get<Rational>(v) * kernels::identity<Rational>(language_);
  }

  Letter letter_arg(const Node& n) const {
    if (n.kind != Kind::kName) throw OperatorError("proj expects a letter", n.line);
    try {
      return language_->rule().letter(n.text);
    } catch (const std::exception&) {
      throw OperatorError("unknown letter '" + n.text + "'", n.line);
    }
  }

  Rational scalar_arg(const Node& n) {
    Value v = eval(n);
    if (auto* q = std::get_if<Rational>(&v)) return *q;
    throw OperatorError("expected a scalar argument", n.line);
  }

  Value call(const Node& n) {
    const auto& f = n.text;
    auto arity = [&](std::size_t k) {
      if (n.args.size() != k)
        throw OperatorError(f + " expects " + std::to_string(k) + " argument" + (k == 1 ? "" : "s"), n.line);
    };
    if (f == "proj") {
      arity(1);
      return kernels::projection<Rational>(language_, letter_arg(*n.args[0]));
    }
    if (f == "hamiltonian") {
      arity(language_->rule().size());
      std::vector<Rational> v;
      for (const auto& a : n.args) v.push_back(scalar_arg(*a));
      return kernels::hamiltonian<Rational>(language_, v);
    }
    if (f == "adj") {
      arity(1);
      return adjoint(as_kernel(eval(*n.args[0])));
    }
    if (f == "poly") {
      if (n.args.size() < 2) throw OperatorError("poly expects an operator and coefficients", n.line);
      auto k = as_kernel(eval(*n.args[0]));
      std::vector<Rational> c;
      for (std::size_t i = 1; i < n.args.size(); ++i) c.push_back(scalar_arg(*n.args[i]));
      return poly_of_kernel(k, c);
    }
    throw OperatorError("unknown function '" + f + "'", n.line);
  }

  Value name(const Node& n) {
    if (auto it = vars_.find(n.text); it != vars_.end()) return it->second;
    const auto& f = n.text;
    if (f == "laplacian") return kernels::laplacian<Rational>(language_);
    if (f == "identity") return kernels::identity<Rational>(language_);
    if (f == "zero") return kernels::zero<Rational>(language_);
    if (f == "length") return kernels::tile_length<Rational>(language_);
    if (f == "h0") return kernels::h0<Rational>(language_);
    if (f == "right_shift") return kernels::right_shift<Rational>(language_);
    if (f == "left_shift") return kernels::left_shift<Rational>(language_);
    throw OperatorError("unknown name '" + f + "'", n.line);
  }

  Value eval(const Node& n) {
    switch (n.kind) {
      case Kind::kNumber:
        try {
          return parse_rational(n.text);
        } catch (const std::exception& e) {
          throw OperatorError("bad number '" + n.text + "'", n.line);
        }
      case Kind::kName:
        return name(n);
      case Kind::kCall:
        return call(n);
      case Kind::kNegate: {
        Value v = eval(*n.args[0]);
        if (auto* q = std::get_if<Rational>(&v)) return Rational(-*q);
        return Rational(-1) * std::get<EquivariantKernel<Rational>>(v);
      }
      case Kind::kPow: {
        Value v = eval(*n.args[0]);
        const unsigned long e = std::stoul(n.text);
        if (auto* q = std::get_if<Rational>(&v)) {
          Rational r = 1;
          for (unsigned long i = 0; i < e; ++i) r *= *q;
          return r;
        }
        std::vector<Rational> c(e + 1, Rational(0));
        c[e] = 1;
        return poly_of_kernel(std::get<EquivariantKernel<Rational>>(v), c);
      }
      default:
        break;
    }
    Value a = eval(*n.args[0]);
    Value b = eval(*n.args[1]);
    const bool sa = std::holds_alternative<Rational>(a);
    const bool sb = std::holds_alternative<Rational>(b);
    switch (n.kind) {
      case Kind::kAdd:
        if (sa && sb) return Rational(std::get<Rational>(a) + std::get<Rational>(b));
        return as_kernel(a) + as_kernel(b);
      case Kind::kSub:
        if (sa && sb) return Rational(std::get<Rational>(a) - std::get<Rational>(b));
        return as_kernel(a) - as_kernel(b);
      case Kind::kMul:
        if (sa && sb) return Rational(std::get<Rational>(a) * std::get<Rational>(b));
        if (sa) return std::get<Rational>(a) * std::get<EquivariantKernel<Rational>>(b);
        if (sb) return std::get<Rational>(b) * std::get<EquivariantKernel<Rational>>(a);
        return convolve(std::get<EquivariantKernel<Rational>>(a), std::get<EquivariantKernel<Rational>>(b));
      case Kind::kDiv: {
        if (!sb) throw OperatorError("cannot divide by an operator", n.line);
        const Rational d = std::get<Rational>(b);
        if (sgn(d) == 0) throw OperatorError("division by zero", n.line);
        if (sa) return Rational(std::get<Rational>(a) / d);
        return Rational(1 / d) * std::get<EquivariantKernel<Rational>>(a);
      }
      default:
        throw OperatorError("internal: unhandled node", n.line);
    }
  }

  Word parse_context(const std::string& key, int line) const {
    const auto& rule = language_->rule();
    std::vector<std::pair<std::string, Letter>> glyphs;
    for (std::size_t l = 0; l < rule.size(); ++l) glyphs.emplace_back(rule.glyph(static_cast<Letter>(l)), static_cast<Letter>(l));
    std::sort(glyphs.begin(), glyphs.end(), [](const auto& x, const auto& y) { return x.first.size() > y.first.size(); });
    Word w;
    std::size_t i = 0;
    while (i < key.size()) {
      bool found = false;
      for (const auto& [g, l] : glyphs) {
        if (key.compare(i, g.size(), g) == 0) {
          w.push_back(static_cast<char>(l));
          i += g.size();
          found = true;
          break;
        }
      }
      if (!found) throw OperatorError("context '" + key + "' uses an unknown letter", line);
    }
    return w;
  }

  EquivariantKernel<Rational> table(const OperatorSpec::Table& t) {
    EquivariantKernel<Rational> k(language_, t.hop, t.radius);
    k.name = t.name;
    const auto& contexts = k.table();
    std::vector<bool> seen(contexts.size(), false);
    for (const auto& [key, values] : t.rows) {
      const Word w = parse_context(key, t.line);
      if (w.size() != 2 * t.radius + 1)
        throw OperatorError("context '" + key + "' must have " + std::to_string(2 * t.radius + 1) + " letters",
                            t.line);
      const std::size_t c = contexts.find(w);
      if (c == ContextTable::npos) throw OperatorError("context '" + key + "' is not a legal word", t.line);
      if (seen[c]) throw OperatorError("context '" + key + "' listed twice", t.line);
      seen[c] = true;
      if (values.size() != 2 * t.hop + 1)
        throw OperatorError("context '" + key + "' needs " + std::to_string(2 * t.hop + 1) + " values", t.line);
      for (std::size_t j = 0; j < values.size(); ++j) {
        try {
          k.at(c, static_cast<int>(j) - static_cast<int>(t.hop)) = parse_rational(values[j]);
        } catch (const std::exception&) {
          throw OperatorError("bad number '" + values[j] + "'", t.line);
        }
      }
    }
    return k;
  }

  std::shared_ptr<const Language> language_;
  std::map<std::string, Value> vars_;
};

}  // namespace

OperatorSpec parse_operator(std::string_view text) {
  OperatorSpec spec;
  spec.source = std::string(text);
  std::optional<OperatorSpec::Table> open;
  int line = 1;
  std::size_t start = 0;
  auto handle = [&](std::string piece, int at) {
    if (auto hash = piece.find('#'); hash != std::string::npos) piece.resize(hash);
    piece = trim(piece);
    if (piece.empty()) return;
    auto w = words(piece);
    if (open) {
      if (w.size() == 1 && w[0] == "end") {
        spec.statements.push_back({open->name, nullptr, open});
        open.reset();
        return;
      }
      auto colon = piece.find(':');
      if (colon == std::string::npos) throw OperatorError("table row needs 'context: values'", at);
      open->rows.emplace_back(trim(piece.substr(0, colon)), words(piece.substr(colon + 1)));
      return;
    }
    if (w[0] == "table") {
      if (w.size() != 6 || w[2] != "radius" || w[4] != "hop")
        throw OperatorError("expected 'table NAME radius R hop H'", at);
      OperatorSpec::Table t;
      t.name = w[1];
      t.line = at;
      try {
        t.radius = static_cast<unsigned>(std::stoul(w[3]));
        t.hop = static_cast<unsigned>(std::stoul(w[5]));
      } catch (const std::exception&) {
        throw OperatorError("table radius and hop must be integers", at);
      }
      open = t;
      return;
    }
    OperatorSpec::Statement st;
    auto eq = piece.find('=');
    std::string body = piece;
    if (eq != std::string::npos) {
      st.name = trim(piece.substr(0, eq));
      if (st.name.empty() || !(std::isalpha(static_cast<unsigned char>(st.name[0])) || st.name[0] == '_') ||
          st.name.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_") !=
              std::string::npos)
        throw OperatorError("bad assignment target '" + st.name + "'", at);
      body = piece.substr(eq + 1);
    }
    Parser p(tokenize(body, at), at);
    st.expr = p.expression();
    if (!p.at_end()) throw OperatorError("unexpected input" + p.near(), at);
    spec.statements.push_back(std::move(st));
  };
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n' || text[i] == ';') {
      handle(std::string(text.substr(start, i - start)), line);
      if (i < text.size() && text[i] == '\n') ++line;
      start = i + 1;
    }
  }
  if (open) throw OperatorError("table '" + open->name + "' is missing 'end'", open->line);
  return spec;
}

EquivariantKernel<Rational> compile(const OperatorSpec& spec, std::shared_ptr<const Language> language) {
  return Compiler(std::move(language)).run(spec);
}

std::string load_operator_text(const std::string& spec) {
  std::ifstream in(spec);
  if (!in) return spec;
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace tracelab
