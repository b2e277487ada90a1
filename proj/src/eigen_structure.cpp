#include "tracelab/eigen_structure.hpp"

#include "tracelab/polynomial.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace tracelab {

std::string to_string(const EigenIndex& index) {
  return "(" + std::to_string(index.i) + "," + std::to_string(index.j) + "," + std::to_string(index.k) + ")";
}

EigenIndex parse_eigen_index(const std::string& text) {
  std::string s;
  for (char c : text)
    if (c != '(' && c != ')' && c != ' ') s.push_back(c == ',' ? ' ' : c);
  std::istringstream in(s);
  std::vector<int> parts;
  for (int v; in >> v;) parts.push_back(v);
  if (!in.eof() || parts.empty() || parts.size() > 3) throw std::invalid_argument("bad index '" + text + "'");
  EigenIndex idx{parts[0], parts.size() > 1 ? parts[1] : 1, parts.size() > 2 ? parts[2] : 1};
  if (idx.i < 1 || idx.j < 1 || idx.k < 1) throw std::invalid_argument("bad index '" + text + "'");
  return idx;
}

template <class T>
std::vector<std::vector<std::vector<T>>> jordan_chains(const Matrix<T>& a, const T& lambda, int multiplicity) {
  const std::size_t n = a.rows();
  const Matrix<T> shifted = a.shifted(lambda);

  // Kernels of N^k until the generalized eigenspace is exhausted.
  std::vector<std::vector<std::vector<T>>> kernels{{}};
  Matrix<T> power = Matrix<T>::identity(n);
  std::size_t last_dim = 0;
  for (int k = 1; k <= multiplicity; ++k) {
    power = power * shifted;
    auto ker = nullspace(power);
    if (ker.size() == last_dim) break;
    last_dim = ker.size();
    kernels.push_back(std::move(ker));
    if (static_cast<int>(last_dim) >= multiplicity) break;
  }
  const int height = static_cast<int>(kernels.size()) - 1;

  auto independent_of = [n](const std::vector<std::vector<T>>& span, const std::vector<T>& v) {
    if (span.empty()) {
      Matrix<T> m = Matrix<T>::from_columns({v}, n);
      return rank(m) == 1;
    }
    auto cols = span;
    Matrix<T> before = Matrix<T>::from_columns(cols, n);
    cols.push_back(v);
    Matrix<T> after = Matrix<T>::from_columns(cols, n);
    return rank(after) > rank(before);
  };

  std::vector<std::vector<T>> tops;     // chain tops
  std::vector<int> top_heights;
  for (int level = height; level >= 1; --level) {
    // Span that level-k vectors must avoid: ker N^(k-1) plus images of
    // already chosen tops brought down to this level.
    std::vector<std::vector<T>> span = kernels[static_cast<std::size_t>(level - 1)];
    for (std::size_t c = 0; c < tops.size(); ++c) {
      std::vector<T> v = tops[c];
      for (int d = top_heights[c]; d > level; --d) v = shifted * v;
      span.push_back(v);
    }
    for (const auto& candidate : kernels[static_cast<std::size_t>(level)]) {
      if (!independent_of(span, candidate)) continue;
      span.push_back(candidate);
      tops.push_back(candidate);
      top_heights.push_back(level);
    }
  }

  std::vector<std::vector<std::vector<T>>> chains;
  for (std::size_t c = 0; c < tops.size(); ++c) {
    std::vector<std::vector<T>> chain(static_cast<std::size_t>(top_heights[c]));
    std::vector<T> v = tops[c];
    for (int j = top_heights[c]; j >= 1; --j) {
      chain[static_cast<std::size_t>(j - 1)] = v;
      v = shifted * v;
    }
    chains.push_back(std::move(chain));
  }
  std::stable_sort(chains.begin(), chains.end(), [](const auto& x, const auto& y) { return x.size() > y.size(); });
  return chains;
}

template std::vector<std::vector<std::vector<Rational>>> jordan_chains(const Matrix<Rational>&, const Rational&, int);
template std::vector<std::vector<std::vector<double>>> jordan_chains(const Matrix<double>&, const double&, int);

namespace {

bool sort_before(const std::complex<double>& a, const std::complex<double>& b) {
  const double ma = std::abs(a), mb = std::abs(b);
  const double tol = 1e-9 * std::max({1.0, ma, mb});
  if (std::fabs(ma - mb) > tol) return ma > mb;
  if (std::fabs(a.real() - b.real()) > tol) return a.real() < b.real();
  return a.imag() > b.imag();
}

// Scales a chain so that its eigenvector is a primitive integer vector with
// a positive last nonzero entry.
void scale_exact_chain(std::vector<RationalVector>& chain) {
  const RationalVector& eig = chain.front();
  mpz_class lcm = 1, gcd = 0;
  for (const auto& x : eig) {
    if (sgn(x) == 0) continue;
    mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), x.get_den().get_mpz_t());
  }
  for (const auto& x : eig) {
    if (sgn(x) == 0) continue;
    mpz_class num = x.get_num() * (lcm / x.get_den());
    mpz_gcd(gcd.get_mpz_t(), gcd.get_mpz_t(), num.get_mpz_t());
  }
  Rational factor(lcm, gcd);
  for (auto it = eig.rbegin(); it != eig.rend(); ++it)
    if (sgn(*it) != 0) {
      if (sgn(*it) < 0) factor = -factor;
      break;
    }
  for (auto& v : chain)
    for (auto& x : v) x *= factor;
}

void scale_float_chain(std::vector<std::vector<double>>& chain) {
  const auto& eig = chain.front();
  double sup = 0;
  for (double x : eig) sup = std::max(sup, std::fabs(x));
  double factor = 1.0 / sup;
  for (double x : eig)
    if (std::fabs(x) > 1e-12 * sup) {
      if (x < 0) factor = -factor;
      break;
    }
  for (auto& v : chain)
    for (auto& x : v) x *= factor;
}

Matrix<double> to_double_matrix(const IntMatrix& m) {
  Matrix<double> d(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) d(i, j) = static_cast<double>(m(i, j));
  return d;
}

}  // namespace

EigenStructure eigen_structure(const IntMatrix& m, EigenScaling scaling) {
  const std::size_t n = m.rows();
  EigenStructure es;
  auto poly = characteristic_polynomial(to_rational(m));
  RootSplit split = split_integer_roots(poly);

  struct Group {
    std::complex<double> value;
    std::optional<long> exact;
    int multiplicity;
  };
  std::vector<Group> groups;
  for (const auto& r : split.integer_roots) groups.push_back({double(r.value), r.value, r.multiplicity});
  // Cluster numeric roots of the irrational cofactor.
  std::vector<std::complex<double>> rest = split.other_roots;
  std::vector<bool> used(rest.size(), false);
  for (std::size_t a = 0; a < rest.size(); ++a) {
    if (used[a]) continue;
    std::complex<double> sum = rest[a];
    int count = 1;
    for (std::size_t b = a + 1; b < rest.size(); ++b)
      if (!used[b] && std::abs(rest[a] - rest[b]) < 1e-6 * std::max(1.0, std::abs(rest[a]))) {
        used[b] = true;
        sum += rest[b];
        ++count;
      }
    std::complex<double> z = sum / double(count);
    if (std::fabs(z.imag()) < 1e-12 * std::max(1.0, std::abs(z))) z = {z.real(), 0.0};
    groups.push_back({z, std::nullopt, count});
  }
  std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) { return sort_before(a.value, b.value); });

  for (const auto& g : groups)
    for (int r = 0; r < g.multiplicity; ++r) es.eigenvalues.push_back({g.value, g.exact});

  const double nu1 = groups.front().value.real();
  const double log_nu1 = std::log(nu1);
  if (!(nu1 > 1.0)) es.warnings.push_back("leading eigenvalue is not expanding");

  const Matrix<long> mt = m.transpose();
  int i_label = 0;
  bool all_exact = true;
  for (const auto& g : groups) {
    if (g.value.imag() < 0) continue;  // folded into its conjugate
    ++i_label;
    Eigenvalue ev{g.value, g.exact};
    const double modulus = std::abs(g.value);
    const bool on_circle = std::fabs(modulus - 1.0) <= 1e-9;
    const bool in_plus = modulus >= 1.0 || on_circle;
    const bool strict = in_plus && !on_circle;
    const double exponent = modulus > 0 ? std::log(modulus) / log_nu1 : -INFINITY;

    auto push = [&](EigenIndex idx, RealVector vec) {
      BasisVector b;
      b.index = idx;
      b.eigenvalue = ev;
      b.vector = std::move(vec);
      b.exponent = exponent;
      b.in_plus = in_plus;
      b.strict = strict;
      b.log_power = strict ? idx.j - 1 : idx.j;
      es.basis.push_back(std::move(b));
    };

    if (g.exact) {
      auto chains = jordan_chains(to_rational(mt), Rational(*g.exact), g.multiplicity);
      int size = 0;
      for (auto& c : chains) size += static_cast<int>(c.size());
      if (size != g.multiplicity) es.warnings.push_back("Jordan detection incomplete for eigenvalue " + std::to_string(*g.exact));
      for (std::size_t k = 0; k < chains.size(); ++k) {
        auto& chain = chains[k];
        if (scaling == EigenScaling::kIntegerPrimitive) {
          scale_exact_chain(chain);
        } else {
          // Sup-norm scaling leaves the exact field only by a rational factor.
          Rational sup = 0;
          for (const auto& x : chain.front()) sup = std::max(sup, Rational(abs(x)));
          Rational factor = 1 / sup;
          for (const auto& x : chain.front())
            if (sgn(x) != 0) {
              if (sgn(x) < 0) factor = -factor;
              break;
            }
          for (auto& v : chain)
            for (auto& x : v) x *= factor;
        }
        for (std::size_t j = 0; j < chain.size(); ++j)
          push({i_label, static_cast<int>(j + 1), static_cast<int>(k + 1)}, RealVector::from_exact(chain[j]));
      }
    } else if (g.value.imag() == 0.0) {
      all_exact = false;
      auto chains = jordan_chains(to_double_matrix(mt), g.value.real(), g.multiplicity);
      int size = 0;
      for (auto& c : chains) size += static_cast<int>(c.size());
      if (size != g.multiplicity)
        es.warnings.push_back("numerical Jordan detection failed for eigenvalue " + std::to_string(g.value.real()));
      for (std::size_t k = 0; k < chains.size(); ++k) {
        scale_float_chain(chains[k]);
        for (std::size_t j = 0; j < chains[k].size(); ++j)
          push({i_label, static_cast<int>(j + 1), static_cast<int>(k + 1)}, RealVector::from_double(chains[k][j]));
      }
    } else {
      all_exact = false;
      if (g.multiplicity > 1) es.warnings.push_back("repeated complex eigenvalue treated as semisimple");
      Eigen::MatrixXd e(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
          e(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = static_cast<double>(mt(r, c));
      Eigen::EigenSolver<Eigen::MatrixXd> solver(e);
      Eigen::Index best = 0;
      for (Eigen::Index t = 1; t < solver.eigenvalues().size(); ++t)
        if (std::abs(solver.eigenvalues()[t] - g.value) < std::abs(solver.eigenvalues()[best] - g.value)) best = t;
      Eigen::VectorXcd v = solver.eigenvectors().col(best);
      // Fix the phase so the largest component is real and positive.
      Eigen::Index arg = 0;
      v.cwiseAbs().maxCoeff(&arg);
      v *= std::abs(v[arg]) / v[arg];
      v /= v.cwiseAbs().maxCoeff();
      std::vector<double> re(n), im(n);
      for (std::size_t r = 0; r < n; ++r) {
        re[r] = v[static_cast<Eigen::Index>(r)].real();
        im[r] = v[static_cast<Eigen::Index>(r)].imag();
      }
      push({i_label, 1, 1}, RealVector::from_double(re));
      push({i_label, 1, 2}, RealVector::from_double(im));
    }
  }
  es.exact = all_exact;

  if (es.basis.size() != n) {
    es.warnings.push_back("generalized eigenbasis is incomplete; currents unavailable");
    return es;
  }
  if (es.exact) {
    std::vector<RationalVector> cols;
    for (const auto& b : es.basis) cols.push_back(*b.vector.exact);
    auto inv = inverse(Matrix<Rational>::from_columns(cols, n));
    if (!inv) {
      es.warnings.push_back("eigenbasis is singular");
      return es;
    }
    for (std::size_t r = 0; r < n; ++r) es.currents.push_back(RealVector::from_exact(inv->row(r)));
  } else {
    std::vector<std::vector<double>> cols;
    for (const auto& b : es.basis) cols.push_back(b.vector.approx);
    auto inv = inverse(Matrix<double>::from_columns(cols, n));
    if (!inv) {
      es.warnings.push_back("eigenbasis is numerically singular");
      return es;
    }
    for (std::size_t r = 0; r < n; ++r) es.currents.push_back(RealVector::from_double(inv->row(r)));
  }
  return es;
}

std::vector<EigenIndex> EigenStructure::plus_indices() const {
  std::vector<EigenIndex> out;
  for (const auto& b : basis)
    if (b.in_plus) out.push_back(b.index);
  return out;
}

bool EigenStructure::contains(const EigenIndex& index) const {
  return std::any_of(basis.begin(), basis.end(), [&](const BasisVector& b) { return b.index == index; });
}

std::size_t EigenStructure::position(const EigenIndex& index) const {
  for (std::size_t p = 0; p < basis.size(); ++p)
    if (basis[p].index == index) return p;
  throw std::out_of_range("no eigen index " + to_string(index));
}

const BasisVector& EigenStructure::at(const EigenIndex& index) const { return basis[position(index)]; }

std::vector<double> EigenStructure::coordinates(const std::vector<double>& class_vector) const {
  std::vector<double> out;
  for (const auto& c : currents) out.push_back(dot(c.approx, class_vector));
  return out;
}

std::optional<RationalVector> EigenStructure::coordinates(const RationalVector& class_vector) const {
  if (!exact || currents.empty()) return std::nullopt;
  RationalVector out;
  for (const auto& c : currents) out.push_back(dot(*c.exact, class_vector));
  return out;
}

}  // namespace tracelab
