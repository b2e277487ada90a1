#include "tracelab/classes.hpp"

#include "tracelab/polynomial.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

namespace tracelab {

double ClassVector::coordinate(const EigenStructure& structure, const EigenIndex& index) const {
  return alpha.approx.at(structure.position(index));
}

std::optional<Rational> ClassVector::exact_coordinate(const EigenStructure& structure,
                                                      const EigenIndex& index) const {
  if (!alpha.exact) return std::nullopt;
  return alpha.exact->at(structure.position(index));
}

ClassProjector::ClassProjector(const SubstitutionRule& rule, unsigned radius) : radius_(radius) {
  const CollaredRule collared(rule, radius);
  const Matrix<Rational> mc = to_rational(collared.matrix());
  const Matrix<Rational> p = to_rational(collared.projection_matrix());
  const std::vector<Rational> charpoly = characteristic_polynomial(to_rational(abelianize(rule)));
  const std::size_t m = rule.size();
  const std::size_t mc_size = collared.size();

  // Functionals vanishing on the range of charpoly(Mc^T) form ker charpoly(Mc).
  const auto kernel = nullspace(evaluate_polynomial(charpoly, mc));
  separated_ = kernel.size() == m;

  Matrix<Rational> u = Matrix<Rational>::from_columns(kernel, mc_size);
  Matrix<Rational> g = p * u;  // m x k, rank m
  auto ech = row_reduce(g);
  if (ech.pivots.size() != m) throw std::runtime_error("class projection: degenerate collar");
  Matrix<Rational> g_sel(m, m);
  Matrix<Rational> u_sel(mc_size, m);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < m; ++i) g_sel(i, j) = g(i, ech.pivots[j]);
    for (std::size_t i = 0; i < mc_size; ++i) u_sel(i, j) = u(i, ech.pivots[j]);
  }
  auto inv = inverse(g_sel.transpose());
  if (!inv) throw std::runtime_error("class projection: singular pairing");
  split_ = *inv * u_sel.transpose();
  lift_ = p.transpose();

  // Collared spectrum minus the base spectrum: exact through the
  // characteristic polynomial quotient for small collars, by value matching
  // otherwise.
  if (mc_size <= 64) {
    auto division = divide(characteristic_polynomial(mc), charpoly);
    RootSplit roots = split_integer_roots(division.quotient);
    for (const auto& r : roots.integer_roots)
      for (int k = 0; k < r.multiplicity; ++k) extra_.emplace_back(static_cast<double>(r.value), 0.0);
    extra_.insert(extra_.end(), roots.other_roots.begin(), roots.other_roots.end());
  } else {
    Eigen::MatrixXd dense(static_cast<Eigen::Index>(mc_size), static_cast<Eigen::Index>(mc_size));
    for (std::size_t i = 0; i < mc_size; ++i)
      for (std::size_t j = 0; j < mc_size; ++j)
        dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = mc(i, j).get_d();
    Eigen::EigenSolver<Eigen::MatrixXd> solver(dense, false);
    std::vector<std::complex<double>> base_roots = numeric_roots(charpoly);
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
      const std::complex<double> z = solver.eigenvalues()(i);
      bool matched = false;
      for (auto it = base_roots.begin(); it != base_roots.end(); ++it) {
        if (std::abs(*it - z) <= 1e-6 * std::max(1.0, std::abs(z))) {
          base_roots.erase(it);
          matched = true;
          break;
        }
      }
      // nilpotent blocks smear zero eigenvalues to roughly eps^(1/size)
      if (!matched) extra_.push_back(std::abs(z) < 1e-4 ? std::complex<double>(0.0, 0.0) : z);
    }
  }
  std::sort(extra_.begin(), extra_.end(), [](auto a, auto b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() > b.imag();
  });
}

std::shared_ptr<const ClassProjector> class_projector(const SubstitutionRule& rule, unsigned radius) {
  static std::mutex mutex;
  static std::map<std::pair<std::string, unsigned>, std::shared_ptr<const ClassProjector>> cache;
  const auto key = std::make_pair(format_rule(rule), radius);
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto projector = std::make_shared<const ClassProjector>(rule, radius);
  std::lock_guard<std::mutex> lock(mutex);
  return cache.emplace(key, projector).first->second;
}

ClassVector class_from_coefficients(const SubstitutionRule& rule, unsigned radius, const RealVector& coefficients,
                                    const EigenStructure& structure) {
  auto projector = class_projector(rule, radius);
  if (coefficients.size() != projector->collared_size())
    throw std::invalid_argument("class vector: coefficient count does not match the collar");
  ClassVector out;
  out.radius = radius;
  out.coefficients = coefficients;
  out.spectrum_separated = projector->separated();
  out.collared_only_spectrum = projector->extra_spectrum();
  if (coefficients.exact) {
    RationalVector b = projector->split() * *coefficients.exact;
    RationalVector lifted = projector->lift() * b;
    RationalVector w(lifted.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = (*coefficients.exact)[i] - lifted[i];
    out.base = RealVector::from_exact(b);
    out.collared_only = RealVector::from_exact(w);
    if (auto alpha = structure.coordinates(b)) {
      out.alpha = RealVector::from_exact(*alpha);
    } else {
      out.alpha = RealVector::from_double(structure.coordinates(out.base.approx));
    }
    return out;
  }
  const Matrix<double> split = projector->split().cast<double>();
  const Matrix<double> lift = projector->lift().cast<double>();
  std::vector<double> b = split * coefficients.approx;
  std::vector<double> lifted = lift * b;
  std::vector<double> w(lifted.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = coefficients.approx[i] - lifted[i];
  out.base = RealVector::from_double(b);
  out.collared_only = RealVector::from_double(w);
  out.alpha = RealVector::from_double(structure.coordinates(b));
  return out;
}

template <class T>
ClassVector diagonal_class(const EquivariantKernel<T>& kernel, const EigenStructure& structure) {
  const std::size_t n = kernel.contexts();
  RealVector coefficients;
  if constexpr (std::is_same_v<T, Rational>) {
    RationalVector diag(n);
    for (std::size_t c = 0; c < n; ++c) diag[c] = kernel.at(c, 0);
    coefficients = RealVector::from_exact(diag);
  } else {
    std::vector<double> diag(n);
    for (std::size_t c = 0; c < n; ++c) diag[c] = kernel.at(c, 0);
    coefficients = RealVector::from_double(diag);
  }
  return class_from_coefficients(kernel.language().rule(), kernel.radius(), coefficients, structure);
}

template ClassVector diagonal_class(const EquivariantKernel<Rational>&, const EigenStructure&);
template ClassVector diagonal_class(const EquivariantKernel<double>&, const EigenStructure&);

}  // namespace tracelab
