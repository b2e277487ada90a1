#pragma once

#include "tracelab/linalg.hpp"
#include "tracelab/substitution.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace tracelab {

// (i, j, k): i numbers distinct eigenvalues in sorted order, j is the height
// inside a Jordan chain (j = 1 is the eigenvector), k labels the chain. A
// complex-conjugate pair shares one i; k = 1 and k = 2 are the real and
// imaginary parts of its eigenvector.
struct EigenIndex {
  int i = 1;
  int j = 1;
  int k = 1;
  friend bool operator==(const EigenIndex&, const EigenIndex&) = default;
  friend auto operator<=>(const EigenIndex&, const EigenIndex&) = default;
};

std::string to_string(const EigenIndex& index);
// Accepts "2", "2,1,1" or "(2,1,1)".
EigenIndex parse_eigen_index(const std::string& text);

struct Eigenvalue {
  std::complex<double> value;
  std::optional<long> exact;  // set for integer roots of the characteristic polynomial
  double modulus() const { return std::abs(value); }
  bool is_real() const { return value.imag() == 0.0; }
};

struct BasisVector {
  EigenIndex index;
  Eigenvalue eigenvalue;
  RealVector vector;       // in the letter basis
  double exponent = 0.0;   // s_i = log|nu_i| / log nu_1
  int log_power = 0;       // exponent of log T in L(i, j, T)
  bool in_plus = false;    // |nu_i| >= 1
  bool strict = false;     // |nu_i| > 1
};

enum class EigenScaling {
  kIntegerPrimitive,  // exact vectors as primitive integer vectors, last nonzero entry positive
  kSupNorm,           // unit sup-norm, first nonzero entry positive
};

class EigenStructure {
 public:
  std::vector<Eigenvalue> eigenvalues;  // with multiplicity, sorted
  std::vector<BasisVector> basis;       // generalized eigenbasis of the transpose action
  // currents[b] is the dual functional of basis[b]: currents[b] . basis[c] = delta_bc.
  std::vector<RealVector> currents;
  bool exact = false;
  std::vector<std::string> warnings;

  std::vector<EigenIndex> plus_indices() const;
  bool contains(const EigenIndex& index) const;
  const BasisVector& at(const EigenIndex& index) const;
  std::size_t position(const EigenIndex& index) const;

  // Coordinates of a class vector (letter basis) in the eigenbasis.
  std::vector<double> coordinates(const std::vector<double>& class_vector) const;
  std::optional<RationalVector> coordinates(const RationalVector& class_vector) const;
};

// Eigenvalues sort by modulus descending, then real part ascending (so -2
// precedes 2), then positive imaginary part first. Integer eigenvalues are handled in exact
// arithmetic; the rest in double precision with rank decisions at
// relative tolerance 1e-8.
EigenStructure eigen_structure(const IntMatrix& m, EigenScaling scaling = EigenScaling::kIntegerPrimitive);

// Jordan chains of a for eigenvalue lambda with the given algebraic
// multiplicity. Each chain lists vectors from the eigenvector upward, with
// a * chain[j] = lambda * chain[j] + chain[j-1]. Chains sort by length
// descending.
template <class T>
std::vector<std::vector<std::vector<T>>> jordan_chains(const Matrix<T>& a, const T& lambda, int multiplicity);

}  // namespace tracelab
