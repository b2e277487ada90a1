#include "tracelab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tracelab {

ContextTable::ContextTable(const SubstitutionRule& rule, unsigned radius)
    : radius_(radius), base_(rule.size()), top_(1), words_(legal_words(rule, 2 * radius + 1)) {
  const double digits = (2.0 * radius + 1) * std::log2(static_cast<double>(std::max<std::size_t>(base_, 2)));
  if (digits > 62) throw std::overflow_error("context radius too large to index");
  for (unsigned i = 0; i < 2 * radius; ++i) top_ *= base_;
  for (std::size_t c = 0; c < words_.size(); ++c) by_code_.emplace(code(words_[c].data()), static_cast<std::uint32_t>(c));
}

std::uint64_t ContextTable::code(const char* letters) const {
  std::uint64_t v = 0;
  for (unsigned i = 0; i < 2 * radius_ + 1; ++i) v = v * base_ + static_cast<Letter>(letters[i]);
  return v;
}

std::size_t ContextTable::find(const Word& w) const {
  if (w.size() != 2 * radius_ + 1) return npos;
  return find_code(code(w.data()));
}

std::size_t ContextTable::find_code(std::uint64_t c) const {
  auto it = by_code_.find(c);
  return it == by_code_.end() ? npos : it->second;
}

std::vector<std::size_t> ContextTable::restriction(const ContextTable& inner) const {
  if (inner.radius_ > radius_) throw std::invalid_argument("restriction to a larger radius");
  const unsigned cut = radius_ - inner.radius_;
  std::vector<std::size_t> out;
  out.reserve(words_.size());
  for (const auto& w : words_) {
    std::size_t idx = inner.find_code(inner.code(w.data() + cut));
    if (idx == npos) throw std::logic_error("sub-context of a legal word is not legal");
    out.push_back(idx);
  }
  return out;
}

Language::Language(SubstitutionRule rule) : rule_(std::move(rule)), perron_(perron_data(rule_)) {}

const ContextTable& Language::contexts(unsigned radius) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto& slot = tables_[radius];
  if (!slot) slot = std::make_unique<ContextTable>(rule_, radius);
  return *slot;
}

namespace {

template <class T>
T from_real(const Real& r) {
  if constexpr (std::is_same_v<T, Rational>) {
    if (!r.exact) throw std::domain_error("exact kernel needs rational tile lengths and density");
    return *r.exact;
  } else {
    return r.approx;
  }
}

template <class T>
T length_of(const Language& lang, Letter l) {
  const RealVector& len = lang.rule().lengths();
  if constexpr (std::is_same_v<T, Rational>) {
    if (!len.exact) throw std::domain_error("exact kernel needs rational tile lengths");
    return (*len.exact)[l];
  } else {
    return len.approx[l];
  }
}

template <class T>
bool nonzero(const T& v) {
  if constexpr (std::is_same_v<T, Rational>)
    return sgn(v) != 0;
  else
    return v != 0.0;
}

template <class T>
void require_same(const EquivariantKernel<T>& a, const EquivariantKernel<T>& b) {
  if (a.language_ptr() != b.language_ptr()) throw std::invalid_argument("kernels over different languages");
}

}  // namespace

template <class T>
EquivariantKernel<T>::EquivariantKernel(std::shared_ptr<const Language> language, unsigned hop, unsigned radius)
    : language_(std::move(language)), table_(&language_->contexts(radius)), hop_(hop), radius_(radius) {
  values_.assign(table_->size() * static_cast<std::size_t>(width()), T(0));
}

template <class T>
EquivariantKernel<T> EquivariantKernel<T>::extended(unsigned hop, unsigned radius) const {
  if (hop < hop_ || radius < radius_) throw std::invalid_argument("extension must not shrink the kernel");
  EquivariantKernel out(language_, hop, radius);
  out.name = name;
  const auto inner = out.table().restriction(*table_);
  const int h = static_cast<int>(hop_);
  for (std::size_t c = 0; c < out.contexts(); ++c)
    for (int d = -h; d <= h; ++d) out.at(c, d) = at(inner[c], d);
  return out;
}

template <class T>
EquivariantKernel<T> EquivariantKernel<T>::compact() const {
  int hop = 0;
  const int h = static_cast<int>(hop_);
  for (std::size_t c = 0; c < contexts(); ++c)
    for (int d = -h; d <= h; ++d)
      if (nonzero(at(c, d))) hop = std::max(hop, std::abs(d));
  for (unsigned r = 0; r <= radius_; ++r) {
    const ContextTable& small = language_->contexts(r);
    const auto inner = table_->restriction(small);
    std::vector<int> seen(small.size(), -1);
    bool ok = true;
    for (std::size_t c = 0; c < contexts() && ok; ++c) {
      const int first = seen[inner[c]];
      if (first < 0) {
        seen[inner[c]] = static_cast<int>(c);
        continue;
      }
      for (int d = -hop; d <= hop && ok; ++d) ok = at(c, d) == at(static_cast<std::size_t>(first), d);
    }
    if (!ok) continue;
    EquivariantKernel out(language_, static_cast<unsigned>(hop), r);
    out.name = name;
    for (std::size_t c = 0; c < contexts(); ++c)
      for (int d = -hop; d <= hop; ++d) out.at(inner[c], d) = at(c, d);
    return out;
  }
  return *this;
}

template <class T>
bool EquivariantKernel<T>::is_zero() const {
  return std::none_of(values_.begin(), values_.end(), [](const T& v) { return nonzero(v); });
}

template <class T>
double EquivariantKernel<T>::sup_norm() const {
  double s = 0;
  for (const auto& v : values_) s = std::max(s, std::fabs(to_double(v)));
  return s;
}

template <class T>
double EquivariantKernel<T>::row_norm() const {
  double best = 0;
  const int h = static_cast<int>(hop_);
  for (std::size_t c = 0; c < contexts(); ++c) {
    double s = 0;
    for (int d = -h; d <= h; ++d) s += std::fabs(to_double(at(c, d)));
    best = std::max(best, s);
  }
  return best;
}

template <class T>
double EquivariantKernel<T>::range_bound() const {
  const auto& len = language_->rule().lengths().approx;
  return hop_ * *std::max_element(len.begin(), len.end());
}

template <class T>
bool EquivariantKernel<T>::self_adjoint() const {
  if constexpr (std::is_same_v<T, Rational>)
    return same_operator(*this, adjoint(*this));
  else
    return same_operator(*this, adjoint(*this), 1e-12 * std::max(1.0, sup_norm()));
}

template <class T>
template <class U>
EquivariantKernel<U> EquivariantKernel<T>::cast() const {
  EquivariantKernel<U> out(language_, hop_, radius_);
  out.name = name;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if constexpr (std::is_same_v<U, double>)
      out.values_[i] = to_double(values_[i]);
    else
      out.values_[i] = U(values_[i]);
  }
  return out;
}

template <class T>
bool same_operator(const EquivariantKernel<T>& a, const EquivariantKernel<T>& b, double tolerance) {
  require_same(a, b);
  const unsigned hop = std::max(a.hop(), b.hop());
  const unsigned radius = std::max(a.radius(), b.radius());
  auto x = a.extended(hop, radius);
  auto y = b.extended(hop, radius);
  for (std::size_t i = 0; i < x.values().size(); ++i) {
    if constexpr (std::is_same_v<T, Rational>) {
      if (x.values()[i] != y.values()[i]) return false;
    } else {
      if (std::fabs(x.values()[i] - y.values()[i]) > tolerance) return false;
    }
  }
  return true;
}

namespace {

template <class T>
EquivariantKernel<T> combine(const EquivariantKernel<T>& a, const EquivariantKernel<T>& b, bool subtract) {
  require_same(a, b);
  const unsigned hop = std::max(a.hop(), b.hop());
  const unsigned radius = std::max(a.radius(), b.radius());
  auto x = a.extended(hop, radius);
  auto y = b.extended(hop, radius);
  const int h = static_cast<int>(hop);
  for (std::size_t c = 0; c < x.contexts(); ++c)
    for (int d = -h; d <= h; ++d) {
      if (subtract)
        x.at(c, d) -= y.at(c, d);
      else
        x.at(c, d) += y.at(c, d);
    }
  x.name.clear();
  return x.compact();
}

}  // namespace

template <class T>
EquivariantKernel<T> operator+(const EquivariantKernel<T>& a, const EquivariantKernel<T>& b) {
  return combine(a, b, false);
}

template <class T>
EquivariantKernel<T> operator-(const EquivariantKernel<T>& a, const EquivariantKernel<T>& b) {
  return combine(a, b, true);
}

template <class T>
EquivariantKernel<T> operator*(const T& s, const EquivariantKernel<T>& a) {
  EquivariantKernel<T> out = a;
  const int h = static_cast<int>(a.hop());
  for (std::size_t c = 0; c < a.contexts(); ++c)
    for (int d = -h; d <= h; ++d) out.at(c, d) *= s;
  out.name.clear();
  return out.compact();
}

template <class T>
EquivariantKernel<T> convolve(const EquivariantKernel<T>& a, const EquivariantKernel<T>& b) {
  require_same(a, b);
  const int ha = static_cast<int>(a.hop());
  const int hb = static_cast<int>(b.hop());
  const unsigned radius = std::max(a.radius(), a.hop() + b.radius());
  EquivariantKernel<T> out(a.language_ptr(), a.hop() + b.hop(), radius);
  const auto inner_a = out.table().restriction(a.table());
  const ContextTable& tb = b.table();
  const int R = static_cast<int>(radius);
  const int rb = static_cast<int>(b.radius());
  for (std::size_t c = 0; c < out.contexts(); ++c) {
    const Word& w = out.table().word(c);
    for (int h1 = -ha; h1 <= ha; ++h1) {
      const T& av = a.at(inner_a[c], h1);
      if (!nonzero(av)) continue;
      const std::size_t cb = tb.find_code(tb.code(w.data() + (R + h1 - rb)));
      for (int h2 = -hb; h2 <= hb; ++h2) {
        const T& bv = b.at(cb, h2);
        if (nonzero(bv)) out.at(c, h1 + h2) += av * bv;
      }
    }
  }
  return out.compact();
}

template <class T>
EquivariantKernel<T> adjoint(const EquivariantKernel<T>& a) {
  const int h = static_cast<int>(a.hop());
  const int r = static_cast<int>(a.radius());
  const unsigned radius = a.radius() + a.hop();
  EquivariantKernel<T> out(a.language_ptr(), a.hop(), radius);
  const ContextTable& ta = a.table();
  const int R = static_cast<int>(radius);
  for (std::size_t c = 0; c < out.contexts(); ++c) {
    const Word& w = out.table().word(c);
    for (int d = -h; d <= h; ++d) {
      const std::size_t cq = ta.find_code(ta.code(w.data() + (R + d - r)));
      out.at(c, d) = a.at(cq, -d);
    }
  }
  if (!a.name.empty()) out.name = "adj(" + a.name + ")";
  return out.compact();
}

template <class T>
EquivariantKernel<T> poly_of_kernel(const EquivariantKernel<T>& a, const std::vector<T>& coefficients) {
  EquivariantKernel<T> acc = kernels::zero<T>(a.language_ptr());
  // Horner: acc = acc * a + c_k.
  const auto id = kernels::identity<T>(a.language_ptr());
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) {
    acc = convolve(acc, a);
    if (nonzero(*it)) acc = acc + (*it) * id;
  }
  return acc;
}

template <class T>
EquivariantKernel<T> random_kernel(std::shared_ptr<const Language> language, unsigned hop, unsigned radius,
                                   std::mt19937_64& rng) {
  EquivariantKernel<T> out(std::move(language), hop, radius);
  std::uniform_int_distribution<int> num(-6, 6);
  std::uniform_int_distribution<int> den(1, 4);
  const int h = static_cast<int>(hop);
  for (std::size_t c = 0; c < out.contexts(); ++c)
    for (int d = -h; d <= h; ++d) {
      const int p = num(rng);
      const int q = den(rng);
      if constexpr (std::is_same_v<T, Rational>)
        out.at(c, d) = Rational(p) / q;
      else
        out.at(c, d) = static_cast<double>(p) / q;
    }
  return out;
}

namespace kernels {

template <class T>
EquivariantKernel<T> zero(std::shared_ptr<const Language> language) {
  EquivariantKernel<T> k(std::move(language), 0, 0);
  k.name = "zero";
  return k;
}

template <class T>
EquivariantKernel<T> identity(std::shared_ptr<const Language> language) {
  EquivariantKernel<T> k(std::move(language), 0, 0);
  for (std::size_t c = 0; c < k.contexts(); ++c) k.at(c, 0) = T(1);
  k.name = "identity";
  return k;
}

template <class T>
EquivariantKernel<T> laplacian(std::shared_ptr<const Language> language) {
  EquivariantKernel<T> k(std::move(language), 1, 0);
  for (std::size_t c = 0; c < k.contexts(); ++c) {
    k.at(c, -1) = T(-1) / T(2);
    k.at(c, 0) = T(1);
    k.at(c, 1) = T(-1) / T(2);
  }
  k.name = "laplacian";
  return k;
}

template <class T>
EquivariantKernel<T> projection(std::shared_ptr<const Language> language, Letter letter) {
  EquivariantKernel<T> k(std::move(language), 0, 0);
  if (letter >= k.contexts()) throw std::out_of_range("letter outside the alphabet");
  k.at(letter, 0) = T(1);
  k.name = "proj(" + k.language().rule().glyph(letter) + ")";
  return k;
}

template <class T>
EquivariantKernel<T> tile_length(std::shared_ptr<const Language> language) {
  EquivariantKernel<T> k(std::move(language), 0, 0);
  for (std::size_t c = 0; c < k.contexts(); ++c) k.at(c, 0) = length_of<T>(k.language(), static_cast<Letter>(c));
  k.name = "length";
  return k;
}

template <class T>
EquivariantKernel<T> hamiltonian(std::shared_ptr<const Language> language, const std::vector<T>& potential) {
  EquivariantKernel<T> k = laplacian<T>(std::move(language));
  if (potential.size() != k.language().rule().size())
    throw std::invalid_argument("hamiltonian needs one potential value per letter");
  for (std::size_t c = 0; c < k.contexts(); ++c) k.at(c, 0) += potential[c];
  k.name = "hamiltonian";
  return k;
}

template <class T>
EquivariantKernel<T> h0(std::shared_ptr<const Language> language) {
  const T density = from_real<T>(language->perron().density);
  std::vector<T> potential;
  for (std::size_t l = 0; l < language->rule().size(); ++l)
    potential.push_back(-density * length_of<T>(*language, static_cast<Letter>(l)));
  auto k = hamiltonian<T>(std::move(language), potential);
  k.name = "h0";
  return k;
}

template <class T>
EquivariantKernel<T> right_shift(std::shared_ptr<const Language> language) {
  EquivariantKernel<T> k(std::move(language), 1, 0);
  for (std::size_t c = 0; c < k.contexts(); ++c) k.at(c, 1) = T(1);
  k.name = "right_shift";
  return k;
}

template <class T>
EquivariantKernel<T> left_shift(std::shared_ptr<const Language> language) {
  EquivariantKernel<T> k(std::move(language), 1, 0);
  for (std::size_t c = 0; c < k.contexts(); ++c) k.at(c, -1) = T(1);
  k.name = "left_shift";
  return k;
}

}  // namespace kernels

std::vector<std::uint32_t> context_indices(const ContextTable& table, const DeloneSegment& segment,
                                           std::size_t begin, std::size_t end) {
  const std::size_t r = table.radius();
  if (begin < r || end + r > segment.size())
    throw std::out_of_range("insufficient margin: segment lacks letter context around the window");
  std::vector<std::uint32_t> out;
  if (end <= begin) return out;
  out.reserve(end - begin);
  const Word& labels = segment.labels();
  std::uint64_t code = table.code(labels.data() + (begin - r));
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) code = table.roll(code, labels[i - 1 - r], labels[i + r]);
    const std::size_t c = table.find_code(code);
    if (c == ContextTable::npos) throw std::logic_error("segment contains an illegal context");
    out.push_back(static_cast<std::uint32_t>(c));
  }
  return out;
}

#define TRACELAB_INSTANTIATE(T)                                                                              \
  template class EquivariantKernel<T>;                                                                       \
  template bool same_operator(const EquivariantKernel<T>&, const EquivariantKernel<T>&, double);             \
  template EquivariantKernel<T> operator+(const EquivariantKernel<T>&, const EquivariantKernel<T>&);         \
  template EquivariantKernel<T> operator-(const EquivariantKernel<T>&, const EquivariantKernel<T>&);         \
  template EquivariantKernel<T> operator*(const T&, const EquivariantKernel<T>&);                            \
  template EquivariantKernel<T> convolve(const EquivariantKernel<T>&, const EquivariantKernel<T>&);          \
  template EquivariantKernel<T> adjoint(const EquivariantKernel<T>&);                                        \
  template EquivariantKernel<T> poly_of_kernel(const EquivariantKernel<T>&, const std::vector<T>&);          \
  template EquivariantKernel<T> random_kernel<T>(std::shared_ptr<const Language>, unsigned, unsigned,        \
                                                 std::mt19937_64&);                                          \
  template EquivariantKernel<T> kernels::zero<T>(std::shared_ptr<const Language>);                           \
  template EquivariantKernel<T> kernels::identity<T>(std::shared_ptr<const Language>);                       \
  template EquivariantKernel<T> kernels::laplacian<T>(std::shared_ptr<const Language>);                      \
  template EquivariantKernel<T> kernels::projection<T>(std::shared_ptr<const Language>, Letter);             \
  template EquivariantKernel<T> kernels::tile_length<T>(std::shared_ptr<const Language>);                    \
  template EquivariantKernel<T> kernels::hamiltonian<T>(std::shared_ptr<const Language>, const std::vector<T>&); \
  template EquivariantKernel<T> kernels::h0<T>(std::shared_ptr<const Language>);                             \
  template EquivariantKernel<T> kernels::right_shift<T>(std::shared_ptr<const Language>);                    \
  template EquivariantKernel<T> kernels::left_shift<T>(std::shared_ptr<const Language>);

TRACELAB_INSTANTIATE(Rational)
TRACELAB_INSTANTIATE(double)
#undef TRACELAB_INSTANTIATE

template EquivariantKernel<double> EquivariantKernel<Rational>::cast<double>() const;
template EquivariantKernel<Rational> EquivariantKernel<Rational>::cast<Rational>() const;
template EquivariantKernel<double> EquivariantKernel<double>::cast<double>() const;

}  // namespace tracelab
