#include "tracelab/collar.hpp"

namespace tracelab {

CollaredRule::CollaredRule(const SubstitutionRule& base, unsigned radius)
    : base_(base), radius_(radius), alphabet_(legal_words(base, 2 * radius + 1)) {
  for (std::size_t c = 0; c < alphabet_.size(); ++c) {
    lookup_.emplace(alphabet_[c], c);
    projection_.push_back(static_cast<Letter>(alphabet_[c][radius]));
  }
  images_.resize(alphabet_.size());
  for (std::size_t c = 0; c < alphabet_.size(); ++c) {
    const Word& w = alphabet_[c];
    const Word left = substitute_word(base_, w.substr(0, radius));
    const Word mid = base_.image(static_cast<Letter>(w[radius]));
    const Word full = left + mid + substitute_word(base_, w.substr(radius + 1));
    for (std::size_t j = 0; j < mid.size(); ++j) {
      Word context = full.substr(left.size() + j - radius, 2 * radius + 1);
      std::size_t idx = index(context);
      if (idx == npos) throw RuleError("collared alphabet is not closed under substitution");
      images_[c].push_back(idx);
    }
  }
}

std::size_t CollaredRule::index(const Word& context) const {
  auto it = lookup_.find(context);
  return it == lookup_.end() ? npos : it->second;
}

IntMatrix CollaredRule::matrix() const {
  IntMatrix m(size(), size(), 0);
  for (std::size_t col = 0; col < size(); ++col)
    for (std::size_t row : images_[col]) m(row, col) += 1;
  return m;
}

IntMatrix CollaredRule::projection_matrix() const {
  IntMatrix p(base_.size(), size(), 0);
  for (std::size_t c = 0; c < size(); ++c) p(projection_[c], c) = 1;
  return p;
}

RealVector CollaredRule::lengths() const {
  const RealVector& base = base_.lengths();
  RealVector out;
  for (std::size_t c = 0; c < size(); ++c) out.approx.push_back(base.approx[projection_[c]]);
  if (base.exact) {
    out.exact.emplace();
    for (std::size_t c = 0; c < size(); ++c) out.exact->push_back((*base.exact)[projection_[c]]);
  }
  return out;
}

RealVector CollaredRule::frequencies() const {
  const IntMatrix m = matrix();
  return perron_right_vector(m, perron_eigenvalue(m), lengths());
}

CollaredRule collar(const SubstitutionRule& rule, unsigned radius) { return CollaredRule(rule, radius); }

}  // namespace tracelab
