#include "tracelab/polynomial.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace tracelab {

Rational evaluate(const RationalPolynomial& p, const Rational& x) {
  Rational acc = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

RationalPolynomial divide_by_linear(const RationalPolynomial& p, const Rational& root) {
  if (p.size() < 2) throw std::invalid_argument("divide_by_linear: constant polynomial");
  const std::size_t n = p.size() - 1;
  RationalPolynomial q(n);
  Rational carry = 0;
  for (std::size_t k = n; k-- > 0;) {
    carry = p[k + 1] + carry * root;
    q[k] = carry;
  }
  if (sgn(p[0] + carry * root) != 0) throw std::invalid_argument("divide_by_linear: not a root");
  return q;
}

PolynomialDivision divide(const RationalPolynomial& p, const RationalPolynomial& d) {
  std::size_t dd = d.size();
  while (dd > 0 && sgn(d[dd - 1]) == 0) --dd;
  if (dd == 0) throw std::invalid_argument("divide: zero divisor");
  RationalPolynomial r = p;
  if (r.size() < dd) return {{Rational(0)}, r};
  RationalPolynomial q(r.size() - dd + 1);
  for (std::size_t k = q.size(); k-- > 0;) {
    Rational c = r[k + dd - 1] / d[dd - 1];
    q[k] = c;
    if (sgn(c) == 0) continue;
    for (std::size_t j = 0; j < dd; ++j) r[k + j] -= c * d[j];
  }
  r.resize(dd - 1);
  if (r.empty()) r.push_back(0);
  return {q, r};
}

std::vector<std::complex<double>> numeric_roots(const RationalPolynomial& p) {
  std::size_t degree = p.size() - 1;
  while (degree > 0 && sgn(p[degree]) == 0) --degree;
  if (degree == 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(degree),
                                                    static_cast<Eigen::Index>(degree));
  const double lead = p[degree].get_d();
  for (std::size_t i = 0; i < degree; ++i) {
    companion(0, static_cast<Eigen::Index>(i)) = -p[degree - 1 - i].get_d() / lead;
    if (i + 1 < degree) companion(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = 1.0;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  std::vector<std::complex<double>> roots;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) roots.push_back(solver.eigenvalues()[i]);
  return roots;
}

RootSplit split_integer_roots(const RationalPolynomial& p) {
  RootSplit split;
  RationalPolynomial rest = p;
  std::set<long> candidates;
  for (auto z : numeric_roots(p)) {
    // Repeated roots converge slowly, so probe a small neighbourhood.
    long centre = std::lround(z.real());
    if (std::fabs(z.imag()) > 1e-3 * std::max(1.0, std::abs(z))) continue;
    for (long d = -1; d <= 1; ++d) candidates.insert(centre + d);
  }
  for (long c : candidates) {
    int multiplicity = 0;
    while (rest.size() > 1 && sgn(evaluate(rest, Rational(c))) == 0) {
      rest = divide_by_linear(rest, Rational(c));
      ++multiplicity;
    }
    if (multiplicity > 0) split.integer_roots.push_back({c, multiplicity});
  }
  split.remainder = rest;
  split.other_roots = numeric_roots(rest);
  return split;
}

}  // namespace tracelab
