#pragma once

#include "tracelab/rational.hpp"

#include <complex>
#include <vector>

namespace tracelab {

// Coefficients in increasing degree.
using RationalPolynomial = std::vector<Rational>;

struct IntegerRoot {
  long value = 0;
  int multiplicity = 0;
};

struct RootSplit {
  std::vector<IntegerRoot> integer_roots;   // exact rational (hence integer) roots
  RationalPolynomial remainder;             // cofactor with no rational roots
  std::vector<std::complex<double>> other_roots;  // numeric roots of the cofactor
};

Rational evaluate(const RationalPolynomial& p, const Rational& x);

// p / (x - root) when root is a root of p; throws otherwise.
RationalPolynomial divide_by_linear(const RationalPolynomial& p, const Rational& root);

struct PolynomialDivision {
  RationalPolynomial quotient;
  RationalPolynomial remainder;
};
// Long division p = q d + r with deg r < deg d.
PolynomialDivision divide(const RationalPolynomial& p, const RationalPolynomial& d);

std::vector<std::complex<double>> numeric_roots(const RationalPolynomial& p);

// Splits a monic integer polynomial into its integer roots (with
// multiplicity) and an irrational cofactor. Candidates come from rounding
// numeric roots and are confirmed by exact evaluation.
RootSplit split_integer_roots(const RationalPolynomial& p);

}  // namespace tracelab
