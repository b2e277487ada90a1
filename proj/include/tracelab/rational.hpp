#pragma once

#include <gmpxx.h>

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace tracelab {

using Rational = mpq_class;
using RationalVector = std::vector<Rational>;

// Parses "p", "p/q", or a decimal literal such as "-0.25" or "1e-3" exactly.
Rational parse_rational(std::string_view text);

// "p/q" (or "p" when the denominator is 1).
std::string to_string(const Rational& value);

inline double to_double(const Rational& value) { return value.get_d(); }
inline double to_double(double value) { return value; }

std::vector<double> to_double(const RationalVector& values);

// Field traits used by the templated linear algebra. Exact arithmetic for
// Rational; tolerance-based zero tests for double.
template <class T>
struct FieldTraits;

template <>
struct FieldTraits<Rational> {
  static constexpr bool exact = true;
  static bool is_zero(const Rational& x, double /*scale*/ = 1.0) { return sgn(x) == 0; }
  static double magnitude(const Rational& x) { return std::fabs(x.get_d()); }
  static Rational from_int(long v) { return Rational(v); }
};

template <>
struct FieldTraits<double> {
  static constexpr bool exact = false;
  static inline double tolerance = 1e-8;
  static bool is_zero(double x, double scale = 1.0) { return std::fabs(x) <= tolerance * scale; }
  static double magnitude(double x) { return std::fabs(x); }
  static double from_int(long v) { return static_cast<double>(v); }
};

}  // namespace tracelab
