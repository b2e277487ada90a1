#pragma once

#include "tracelab/delone.hpp"
#include "tracelab/linalg.hpp"
#include "tracelab/substitution.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace tracelab {

// Legal words of length 2r+1, sorted, with a hash index by base-m code.
// Same order as collar(rule, r).alphabet().
class ContextTable {
 public:
  ContextTable(const SubstitutionRule& rule, unsigned radius);
  unsigned radius() const { return radius_; }
  std::size_t size() const { return words_.size(); }
  const Word& word(std::size_t c) const { return words_[c]; }
  const std::vector<Word>& words() const { return words_; }
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t find(const Word& w) const;
  std::size_t find_code(std::uint64_t code) const;
  std::uint64_t code(const char* letters) const;
  // Code of the window one step to the right.
  std::uint64_t roll(std::uint64_t code, char leaving, char entering) const {
    return (code - static_cast<std::uint64_t>(static_cast<Letter>(leaving)) * top_) * base_ +
           static_cast<Letter>(entering);
  }
  // Index of the radius-r' context inside each context (r' <= r).
  std::vector<std::size_t> restriction(const ContextTable& inner) const;

 private:
  unsigned radius_;
  std::uint64_t base_;
  std::uint64_t top_;  // base^(2r)
  std::vector<Word> words_;
  std::unordered_map<std::uint64_t, std::uint32_t> by_code_;
};

// Shared per-rule cache of context tables and Perron data.
class Language {
 public:
  explicit Language(SubstitutionRule rule);
  const SubstitutionRule& rule() const { return rule_; }
  const PerronData& perron() const { return perron_; }
  const ContextTable& contexts(unsigned radius) const;

 private:
  SubstitutionRule rule_;
  PerronData perron_;
  mutable std::mutex mutex_;
  mutable std::map<unsigned, std::unique_ptr<ContextTable>> tables_;
};

// k(p, p + h) for a point p whose radius-r letter context is c and a hop of
// h points (|h| <= hop). Values of real kernels only; T is Rational (exact)
// or double.
template <class T>
class EquivariantKernel {
 public:
  EquivariantKernel() = default;
  EquivariantKernel(std::shared_ptr<const Language> language, unsigned hop, unsigned radius);

  const std::shared_ptr<const Language>& language_ptr() const { return language_; }
  const Language& language() const { return *language_; }
  const ContextTable& table() const { return *table_; }
  unsigned hop() const { return hop_; }
  unsigned radius() const { return radius_; }
  std::size_t contexts() const { return table_->size(); }
  int width() const { return 2 * static_cast<int>(hop_) + 1; }

  T& at(std::size_t c, int h) { return values_[c * width() + (h + static_cast<int>(hop_))]; }
  const T& at(std::size_t c, int h) const { return values_[c * width() + (h + static_cast<int>(hop_))]; }
  const std::vector<T>& values() const { return values_; }

  // The same operator described with a larger hop and radius.
  EquivariantKernel extended(unsigned hop, unsigned radius) const;
  // Smallest hop and radius describing the same operator.
  EquivariantKernel compact() const;
  bool is_zero() const;
  // Largest |value|.
  double sup_norm() const;
  // Largest absolute row sum, an upper bound for the operator norm.
  double row_norm() const;
  // Bound on |x_q - x_p| over nonzero entries.
  double range_bound() const;
  bool self_adjoint() const;

  template <class U>
  EquivariantKernel<U> cast() const;

  std::string name;

 private:
  template <class>
  friend class EquivariantKernel;
  std::shared_ptr<const Language> language_;
  const ContextTable* table_ = nullptr;
  unsigned hop_ = 0;
  unsigned radius_ = 0;
  std::vector<T> values_;
};

template <class T>
bool same_operator(const EquivariantKernel<T>& a, const EquivariantKernel<T>& b, double tolerance = 0.0);

template <class T>
EquivariantKernel<T> operator+(const EquivariantKernel<T>& a, const EquivariantKernel<T>& b);
template <class T>
EquivariantKernel<T> operator-(const EquivariantKernel<T>& a, const EquivariantKernel<T>& b);
template <class T>
EquivariantKernel<T> operator*(const T& s, const EquivariantKernel<T>& a);

// (a b)(p, q) = sum_x a(p, x) b(x, q). Hop h_a + h_b, radius
// max(r_a, h_a + r_b).
template <class T>
EquivariantKernel<T> convolve(const EquivariantKernel<T>& a, const EquivariantKernel<T>& b);

// a*(p, q) = a(q, p). Radius r + hop, then compacted.
template <class T>
EquivariantKernel<T> adjoint(const EquivariantKernel<T>& a);

// sum_k c[k] a^k, coefficients in increasing degree.
template <class T>
EquivariantKernel<T> poly_of_kernel(const EquivariantKernel<T>& a, const std::vector<T>& coefficients);

template <class T>
EquivariantKernel<T> random_kernel(std::shared_ptr<const Language> language, unsigned hop, unsigned radius,
                                   std::mt19937_64& rng);

namespace kernels {
template <class T>
EquivariantKernel<T> zero(std::shared_ptr<const Language> language);
template <class T>
EquivariantKernel<T> identity(std::shared_ptr<const Language> language);
template <class T>
EquivariantKernel<T> laplacian(std::shared_ptr<const Language> language);
template <class T>
EquivariantKernel<T> projection(std::shared_ptr<const Language> language, Letter letter);
// Diagonal tile length: theta_L on points labelled L.
template <class T>
EquivariantKernel<T> tile_length(std::shared_ptr<const Language> language);
// Laplacian plus per-letter potentials.
template <class T>
EquivariantKernel<T> hamiltonian(std::shared_ptr<const Language> language, const std::vector<T>& potential);
// Laplacian minus density * tile_length: the example operator whose class
// is sum_L [chi_L] - density * v_1.
template <class T>
EquivariantKernel<T> h0(std::shared_ptr<const Language> language);
// k(p, p + 1) = 1, resp. k(p, p - 1) = 1.
template <class T>
EquivariantKernel<T> right_shift(std::shared_ptr<const Language> language);
template <class T>
EquivariantKernel<T> left_shift(std::shared_ptr<const Language> language);
}  // namespace kernels

// Context indices for points [begin, end) of a segment.
std::vector<std::uint32_t> context_indices(const ContextTable& table, const DeloneSegment& segment,
                                           std::size_t begin, std::size_t end);

}  // namespace tracelab
