#pragma once

#include "tracelab/substitution.hpp"

#include <cstddef>
#include <unordered_map>
#include <vector>

namespace tracelab {

// A letter together with r letters of context on each side. Collared
// letters are the legal words of length 2r+1; the middle letter is the tile.
class CollaredRule {
 public:
  CollaredRule(const SubstitutionRule& base, unsigned radius);

  const SubstitutionRule& base() const { return base_; }
  unsigned radius() const { return radius_; }
  std::size_t size() const { return alphabet_.size(); }

  const std::vector<Word>& alphabet() const { return alphabet_; }
  const Word& word(std::size_t c) const { return alphabet_.at(c); }
  Letter center(std::size_t c) const { return static_cast<Letter>(alphabet_.at(c)[radius_]); }
  // Index of a collared letter, or npos when the word is not legal.
  std::size_t index(const Word& context) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  // images()[c] lists collared letter indices of the image of collared letter c.
  const std::vector<std::vector<std::size_t>>& images() const { return images_; }
  const std::vector<Letter>& projection() const { return projection_; }

  IntMatrix matrix() const;
  // P with P(L, c) = 1 when c projects to L; P * matrix() == M * P.
  IntMatrix projection_matrix() const;

  // Tile lengths pulled back from the base rule.
  RealVector lengths() const;
  // Collared Perron frequencies, normalized like the base frequencies.
  RealVector frequencies() const;

 private:
  SubstitutionRule base_;
  unsigned radius_;
  std::vector<Word> alphabet_;
  std::unordered_map<Word, std::size_t> lookup_;
  std::vector<std::vector<std::size_t>> images_;
  std::vector<Letter> projection_;
};

// Collared letters are taken from legal words directly; the image of
// (l, c, r) is read off sigma(l) sigma(c) sigma(r), which always has r letters
// of context on both sides since images are nonempty. Throws RuleError if an
// induced image leaves the enumerated alphabet.
CollaredRule collar(const SubstitutionRule& rule, unsigned radius);

}  // namespace tracelab
