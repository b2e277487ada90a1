#pragma once

#include "tracelab/collar.hpp"
#include "tracelab/eigen_structure.hpp"
#include "tracelab/kernel.hpp"

#include <complex>
#include <memory>
#include <vector>

namespace tracelab {

// Class of an operator's diagonal. coefficients[c] is A(p, p) at points
// whose radius-r context is collared letter c. The collared class splits
// as P^T base + collared_only, where collared_only lies in the part of the
// collared spectrum that the base matrix does not see.
struct ClassVector {
  unsigned radius = 0;
  RealVector coefficients;
  RealVector base;           // letter basis
  RealVector alpha;          // eigen-coordinates, in EigenStructure::basis order
  RealVector collared_only;  // collared letter basis
  std::vector<std::complex<double>> collared_only_spectrum;
  bool spectrum_separated = true;

  double coordinate(const EigenStructure& structure, const EigenIndex& index) const;
  std::optional<Rational> exact_coordinate(const EigenStructure& structure, const EigenIndex& index) const;
};

// Splitting data for one collar radius, cached per (rule, radius).
class ClassProjector {
 public:
  ClassProjector(const SubstitutionRule& rule, unsigned radius);

  unsigned radius() const { return radius_; }
  std::size_t collared_size() const { return lift_.rows(); }
  bool separated() const { return separated_; }
  const std::vector<std::complex<double>>& extra_spectrum() const { return extra_; }

  // base = split * c; the collared-only part is c - lift * base.
  const Matrix<Rational>& split() const { return split_; }
  const Matrix<Rational>& lift() const { return lift_; }

 private:
  unsigned radius_;
  bool separated_ = true;
  Matrix<Rational> split_;
  Matrix<Rational> lift_;
  std::vector<std::complex<double>> extra_;
};

std::shared_ptr<const ClassProjector> class_projector(const SubstitutionRule& rule, unsigned radius);

ClassVector class_from_coefficients(const SubstitutionRule& rule, unsigned radius, const RealVector& coefficients,
                                    const EigenStructure& structure);

template <class T>
ClassVector diagonal_class(const EquivariantKernel<T>& kernel, const EigenStructure& structure);

}  // namespace tracelab
