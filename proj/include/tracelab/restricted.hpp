#pragma once

#include "tracelab/kernel.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace tracelab {

// A kernel restricted to l2(Lambda ∩ [-T, T]), stored by diagonals:
// diagonal(d)[i] = A(i, i + d), zero where i + d leaves the window.
template <class T>
class RestrictedMatrix {
 public:
  RestrictedMatrix(std::size_t dimension, unsigned bandwidth);

  std::size_t dimension() const { return n_; }
  unsigned bandwidth() const { return bw_; }
  std::size_t first_point() const { return first_; }  // segment index of row 0
  double window() const { return window_; }
  bool hermitian() const { return hermitian_; }

  std::vector<T>& diagonal(int d) { return diags_[static_cast<std::size_t>(d + static_cast<int>(bw_))]; }
  const std::vector<T>& diagonal(int d) const { return diags_[static_cast<std::size_t>(d + static_cast<int>(bw_))]; }
  T entry(std::size_t i, std::size_t j) const;
  Matrix<T> dense() const;

 private:
  template <class U>
  friend RestrictedMatrix<U> restrict_kernel(const EquivariantKernel<U>&, const DeloneSegment&, double);
  template <class U>
  friend RestrictedMatrix<U> restrict_range(const EquivariantKernel<U>&, const DeloneSegment&, std::size_t,
                                            std::size_t);
  std::size_t n_;
  unsigned bw_;
  std::size_t first_ = 0;
  double window_ = 0.0;
  bool hermitian_ = false;
  std::vector<std::vector<T>> diags_;
};

// Throws std::out_of_range when the segment lacks the letter context the
// kernel needs around the window.
template <class T>
RestrictedMatrix<T> restrict_kernel(const EquivariantKernel<T>& kernel, const DeloneSegment& segment, double T_window);

// Restriction to segment points [begin, end).
template <class T>
RestrictedMatrix<T> restrict_range(const EquivariantKernel<T>& kernel, const DeloneSegment& segment,
                                   std::size_t begin, std::size_t end);

template <class T>
T trace_restricted(const RestrictedMatrix<T>& m);

// tr(sum_k c_k M^k) from banded matrix powers.
template <class T>
T poly_trace_power(const RestrictedMatrix<T>& m, const std::vector<T>& coefficients);

// Eigenvalues of a Hermitian restricted matrix, ascending. Uses the banded
// solver for bandwidth <= 32 and the dense one otherwise.
std::vector<double> spectrum(const RestrictedMatrix<double>& m);

struct PolyTrace {
  double eigen = 0.0;                 // sum_i phi(lambda_i)
  std::optional<double> power;        // cross-check for degree <= 4
  double relative_gap = 0.0;
};
PolyTrace poly_trace_restricted(const RestrictedMatrix<double>& m, const std::vector<double>& coefficients);

// sum over window points p of A(p, p), without building the matrix.
template <class T>
T windowed_diagonal_sum(const EquivariantKernel<T>& kernel, const DeloneSegment& segment, double T_window);

// tr(phi(A|_[-T,T])) by the power path, processed in chunks of about
// `chunk` rows so windows with millions of points fit in memory.
double windowed_poly_trace(const EquivariantKernel<double>& kernel, const DeloneSegment& segment, double T_window,
                           const std::vector<double>& coefficients, std::size_t chunk = 1 << 18);

// CSV triplets i,j,value of the nonzero entries.
void write_matrix_csv(const RestrictedMatrix<double>& m, std::ostream& out);

}  // namespace tracelab
