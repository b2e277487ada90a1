#pragma once

#include "tracelab/linalg.hpp"
#include "tracelab/rational.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tracelab {

// Words are stored as strings of letter indices (0 .. m-1), not glyphs.
using Word = std::string;
using Letter = unsigned char;

using IntMatrix = Matrix<long>;

// A real quantity that may also be known exactly.
struct Real {
  double approx = 0.0;
  std::optional<Rational> exact;

  static Real from_exact(const Rational& q) { return {q.get_d(), q}; }
  static Real from_double(double v) { return {v, std::nullopt}; }
  bool is_exact() const { return exact.has_value(); }
};

struct RealVector {
  std::vector<double> approx;
  std::optional<RationalVector> exact;

  static RealVector from_exact(const RationalVector& v) { return {to_double(v), v}; }
  static RealVector from_double(std::vector<double> v) { return {std::move(v), std::nullopt}; }
  bool is_exact() const { return exact.has_value(); }
  std::size_t size() const { return approx.size(); }
};

class RuleError : public std::runtime_error {
 public:
  RuleError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class SubstitutionRule {
 public:
  // Validates images against the alphabet and computes default lengths
  // (left Perron eigenvector scaled so its smallest entry is 1) when none
  // are given. Given lengths must be a left eigenvector for the Perron value.
  SubstitutionRule(std::vector<std::string> glyphs, std::vector<Word> images,
                   std::optional<RealVector> lengths = std::nullopt);

  std::size_t size() const { return glyphs_.size(); }
  const std::vector<std::string>& glyphs() const { return glyphs_; }
  const std::string& glyph(Letter l) const { return glyphs_.at(l); }
  const std::vector<Word>& images() const { return images_; }
  const Word& image(Letter l) const { return images_.at(l); }
  const RealVector& lengths() const { return lengths_; }
  bool lengths_given() const { return lengths_given_; }

  // Glyph string <-> index word.
  Word encode(std::string_view text) const;
  std::string decode(const Word& word) const;
  Letter letter(std::string_view glyph) const;

 private:
  std::vector<std::string> glyphs_;
  std::vector<Word> images_;
  RealVector lengths_;
  bool lengths_given_ = false;
};

// Rule-file grammar: "<letter> -> <word>" per line, optional
// "lengths v1 v2 ..." (alphabet order = first appearance), '#' comments.
SubstitutionRule parse_rule(std::string_view text);
SubstitutionRule load_rule_file(const std::string& path);

// Canonical text form accepted by parse_rule.
std::string format_rule(const SubstitutionRule& rule);

// Entry (L, L') counts occurrences of L in the image of L'.
IntMatrix abelianize(const SubstitutionRule& rule);
std::vector<long> abelianize_word(const Word& word, std::size_t alphabet_size);

struct Primitivity {
  bool primitive = false;
  unsigned witness_power = 0;  // smallest positive power checked that is entrywise positive
};
Primitivity check_primitive(const IntMatrix& m);

bool check_proper(const SubstitutionRule& rule);

Word substitute_word(const SubstitutionRule& rule, const Word& word);
Word substitute_power(const SubstitutionRule& rule, const Word& word, unsigned power);

struct Seed {
  Letter left = 0;
  Letter right = 0;
  unsigned power = 1;  // substitution power sigma^power used for generation
  // The limit word on each side is the fixed point of sigma^power grown from
  // these anchors: the seed letters themselves when they nest, otherwise the
  // common last/first letters of a proper rule.
  Letter left_anchor = 0;
  Letter right_anchor = 0;
};

// Proper rules accept any seed (power 1). Otherwise finds the smallest
// p <= m^2 with sigma^p(L-) ending in L-, sigma^p(L+) starting with L+, and
// L- L+ legal. Throws RuleError when no such p exists.
Seed admissible_seed(const SubstitutionRule& rule, Letter left, Letter right);

// The first max_letters letters right of the origin (resp. the last
// max_letters letters left of it) of the limit two-sided word.
Word limit_right(const SubstitutionRule& rule, const Seed& seed, std::size_t max_letters);
Word limit_left(const SubstitutionRule& rule, const Seed& seed, std::size_t max_letters);

struct TwoSidedWord {
  Word left;   // ends at the origin
  Word right;  // starts at the origin
  std::string render(const SubstitutionRule& rule) const;
};

// sigma^(power*depth)(L-) . sigma^(power*depth)(L+).
TwoSidedWord generate_fixed_word(const SubstitutionRule& rule, const Seed& seed, unsigned depth);

// First max_letters letters of sigma^depth(letter) (or the whole image if
// shorter), expanded depth-first so only the requested part is built.
Word expand_prefix(const SubstitutionRule& rule, Letter letter, unsigned depth, std::size_t max_letters);
// Last max_letters letters of sigma^depth(letter), in reading order.
Word expand_suffix(const SubstitutionRule& rule, Letter letter, unsigned depth, std::size_t max_letters);

// All legal words of the given length (factors of some sigma^n(L)), sorted.
std::vector<Word> legal_words(const SubstitutionRule& rule, std::size_t length);
bool is_legal(const SubstitutionRule& rule, const Word& word);

struct PerronData {
  Real expansion;          // nu_1
  RealVector lengths;      // theta, left Perron eigenvector
  RealVector frequencies;  // right Perron eigenvector with sum f_L theta_L = 1
  Real density;            // sum f_L
};

PerronData perron_data(const SubstitutionRule& rule);

// Perron eigenvalue of a primitive matrix; exact when it is an integer.
Real perron_eigenvalue(const IntMatrix& m);

// Right Perron eigenvector of a primitive matrix, scaled so weights . f = 1.
// Exact when both nu and the weights are.
RealVector perron_right_vector(const IntMatrix& m, const Real& nu, const RealVector& weights);

// Periodicity heuristic: the depth-8 fixed word (capped in length) has a
// period no larger than half its length.
bool looks_periodic(const SubstitutionRule& rule);

}  // namespace tracelab
