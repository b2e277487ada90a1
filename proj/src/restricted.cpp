#include "tracelab/restricted.hpp"
#include "tracelab/parallel.hpp"
#include "tracelab/simd.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace tracelab {

template <class T>
RestrictedMatrix<T>::RestrictedMatrix(std::size_t dimension, unsigned bandwidth)
    : n_(dimension), bw_(bandwidth), diags_(2 * bandwidth + 1, std::vector<T>(dimension, T(0))) {}

template <class T>
T RestrictedMatrix<T>::entry(std::size_t i, std::size_t j) const {
  const long d = static_cast<long>(j) - static_cast<long>(i);
  if (std::labs(d) > static_cast<long>(bw_) || i >= n_ || j >= n_) return T(0);
  return diagonal(static_cast<int>(d))[i];
}

template <class T>
Matrix<T> RestrictedMatrix<T>::dense() const {
  Matrix<T> m(n_, n_);
  const int b = static_cast<int>(bw_);
  for (int d = -b; d <= b; ++d)
    for (std::size_t i = 0; i < n_; ++i) {
      const long j = static_cast<long>(i) + d;
      if (j >= 0 && j < static_cast<long>(n_)) m(i, static_cast<std::size_t>(j)) = diagonal(d)[i];
    }
  return m;
}

namespace {

// Banded matrices in diagonal storage for the power path.
template <class T>
struct Banded {
  std::size_t n = 0;
  int bw = 0;
  std::vector<std::vector<T>> d;
  Banded(std::size_t n_, int bw_) : n(n_), bw(bw_), d(2 * static_cast<std::size_t>(bw_) + 1, std::vector<T>(n_, T(0))) {}
  std::vector<T>& diag(int k) { return d[static_cast<std::size_t>(k + bw)]; }
  const std::vector<T>& diag(int k) const { return d[static_cast<std::size_t>(k + bw)]; }
};

template <class T>
void accumulate(T* acc, const T* x, const T* y, std::size_t len) {
  if constexpr (std::is_same_v<T, double>) {
    simd::active().fma_accumulate(acc, x, y, len);
  } else {
    for (std::size_t i = 0; i < len; ++i) acc[i] += x[i] * y[i];
  }
}

template <class T>
T inner(const T* x, const T* y, std::size_t len) {
  if constexpr (std::is_same_v<T, double>) {
    return simd::active().dot(x, y, len);
  } else {
    T s(0);
    for (std::size_t i = 0; i < len; ++i) s += x[i] * y[i];
    return s;
  }
}

template <class T>
Banded<T> multiply(const Banded<T>& a, const Banded<T>& b) {
  const long n = static_cast<long>(a.n);
  Banded<T> c(a.n, a.bw + b.bw);
  for (int d1 = -a.bw; d1 <= a.bw; ++d1)
    for (int d2 = -b.bw; d2 <= b.bw; ++d2) {
      // C(i, i + d1 + d2) += A(i, i + d1) B(i + d1, i + d1 + d2)
      const long lo = std::max(0L, static_cast<long>(-d1));
      const long hi = std::min(n, n - d1);
      if (hi <= lo) continue;
      accumulate(c.diag(d1 + d2).data() + lo, a.diag(d1).data() + lo, b.diag(d2).data() + lo + d1,
                 static_cast<std::size_t>(hi - lo));
    }
  return c;
}

// sum over rows i in [s, e) of (X Y)(i, i).
template <class T>
T pair_trace(const Banded<T>& x, const Banded<T>& y, std::size_t s, std::size_t e) {
  const long n = static_cast<long>(x.n);
  T total(0);
  const int w = std::min(x.bw, y.bw);
  for (int d = -w; d <= w; ++d) {
    const long lo = std::max({static_cast<long>(s), static_cast<long>(-d), 0L});
    const long hi = std::min({static_cast<long>(e), n - d, n});
    if (hi <= lo) continue;
    total += inner(x.diag(d).data() + lo, y.diag(-d).data() + lo + d, static_cast<std::size_t>(hi - lo));
  }
  return total;
}

template <class T>
T diag_sum(const Banded<T>& x, std::size_t s, std::size_t e) {
  T total(0);
  for (std::size_t i = s; i < e; ++i) total += x.diag(0)[i];
  return total;
}

// sum_k c_k tr(M^k) restricted to rows [s, e).
template <class T>
T power_trace_rows(const Banded<T>& m, const std::vector<T>& c, std::size_t s, std::size_t e) {
  const std::size_t degree = c.empty() ? 0 : c.size() - 1;
  std::vector<Banded<T>> powers;  // powers[j] = M^(j+1)
  powers.push_back(m);
  while (powers.size() < (degree + 1) / 2) powers.push_back(multiply(powers.back(), m));
  T total(0);
  for (std::size_t k = 0; k <= degree; ++k) {
    if (c[k] == T(0)) continue;
    T tk;
    if (k == 0)
      tk = T(static_cast<long>(e - s));
    else if (k == 1)
      tk = diag_sum(m, s, e);
    else {
      const std::size_t a = k / 2, b = k - k / 2;
      tk = pair_trace(powers[a - 1], powers[b - 1], s, e);
    }
    total += c[k] * tk;
  }
  return total;
}

template <class T>
Banded<T> to_banded(const RestrictedMatrix<T>& m) {
  Banded<T> b(m.dimension(), static_cast<int>(m.bandwidth()));
  const int w = static_cast<int>(m.bandwidth());
  for (int d = -w; d <= w; ++d) b.diag(d) = m.diagonal(d);
  return b;
}

template <class T>
bool is_symmetric(const RestrictedMatrix<T>& m) {
  const int w = static_cast<int>(m.bandwidth());
  double scale = 0;
  for (int d = -w; d <= w; ++d)
    for (const auto& v : m.diagonal(d)) scale = std::max(scale, std::fabs(to_double(v)));
  for (int d = 1; d <= w; ++d) {
    const auto& up = m.diagonal(d);
    const auto& down = m.diagonal(-d);
    for (std::size_t i = 0; i + static_cast<std::size_t>(d) < m.dimension(); ++i) {
      if constexpr (std::is_same_v<T, double>) {
        if (std::fabs(up[i] - down[i + static_cast<std::size_t>(d)]) > 1e-12 * scale) return false;
      } else {
        if (up[i] != down[i + static_cast<std::size_t>(d)]) return false;
      }
    }
  }
  return true;
}

}  // namespace

template <class T>
RestrictedMatrix<T> restrict_range(const EquivariantKernel<T>& kernel, const DeloneSegment& segment,
                                   std::size_t begin, std::size_t end) {
  if (end < begin) end = begin;
  const auto ctx = context_indices(kernel.table(), segment, begin, end);
  const std::size_t n = end - begin;
  RestrictedMatrix<T> m(n, kernel.hop());
  m.first_ = begin;
  const int h = static_cast<int>(kernel.hop());
  for (int d = -h; d <= h; ++d) {
    auto& diag = m.diagonal(d);
    for (std::size_t i = 0; i < n; ++i) {
      const long j = static_cast<long>(i) + d;
      if (j < 0 || j >= static_cast<long>(n)) continue;
      diag[i] = kernel.at(ctx[i], d);
    }
  }
  m.hermitian_ = is_symmetric(m);
  return m;
}

template <class T>
RestrictedMatrix<T> restrict_kernel(const EquivariantKernel<T>& kernel, const DeloneSegment& segment, double T_window) {
  const auto r = segment.window_range(T_window);
  auto m = restrict_range(kernel, segment, r.begin, r.end);
  m.window_ = T_window;
  return m;
}

template <class T>
T trace_restricted(const RestrictedMatrix<T>& m) {
  T s(0);
  for (const auto& v : m.diagonal(0)) s += v;
  return s;
}

template <class T>
T poly_trace_power(const RestrictedMatrix<T>& m, const std::vector<T>& coefficients) {
  return power_trace_rows(to_banded(m), coefficients, 0, m.dimension());
}

std::vector<double> spectrum(const RestrictedMatrix<double>& m) {
  if (!m.hermitian()) throw std::invalid_argument("spectrum needs a self-adjoint operator");
  const auto n = static_cast<lapack_int>(m.dimension());
  std::vector<double> w(m.dimension());
  if (n == 0) return w;
  lapack_int info = 0;
  if (m.bandwidth() <= 32) {
    const lapack_int kd = static_cast<lapack_int>(m.bandwidth());
    const lapack_int ldab = kd + 1;
    std::vector<double> ab(static_cast<std::size_t>(ldab) * m.dimension(), 0.0);
    // Upper band storage, column major: ab[kd + i - j + j * ldab] = A(i, j), i <= j.
    for (lapack_int d = 0; d <= kd; ++d) {
      const auto& diag = m.diagonal(static_cast<int>(d));
      for (lapack_int i = 0; i + d < n; ++i) {
        const lapack_int j = i + d;
        ab[static_cast<std::size_t>(kd + i - j + j * ldab)] = diag[static_cast<std::size_t>(i)];
      }
    }
    double z = 0;
    info = LAPACKE_dsbevd(LAPACK_COL_MAJOR, 'N', 'U', n, kd, ab.data(), ldab, w.data(), &z, 1);
  } else {
    Matrix<double> dense = m.dense();
    std::vector<double> a(m.dimension() * m.dimension());
    for (std::size_t i = 0; i < m.dimension(); ++i)
      for (std::size_t j = 0; j < m.dimension(); ++j) a[i * m.dimension() + j] = dense(i, j);
    info = LAPACKE_dsyevd(LAPACK_ROW_MAJOR, 'N', 'U', n, a.data(), n, w.data());
  }
  if (info != 0) throw std::runtime_error("eigensolver failed with info " + std::to_string(info));
  return w;
}

PolyTrace poly_trace_restricted(const RestrictedMatrix<double>& m, const std::vector<double>& coefficients) {
  PolyTrace out;
  const auto lambda = spectrum(m);
  const unsigned degree = coefficients.empty() ? 0 : static_cast<unsigned>(coefficients.size() - 1);
  std::vector<double> sums(degree + 1, 0.0);
  simd::active().power_sums(lambda.data(), lambda.size(), degree, sums.data());
  for (unsigned k = 0; k <= degree; ++k) out.eigen += coefficients[k] * sums[k];
  if (degree <= 4) {
    out.power = poly_trace_power(m, coefficients);
    out.relative_gap = std::fabs(out.eigen - *out.power) / std::max(1.0, std::fabs(*out.power));
  }
  return out;
}

template <class T>
T windowed_diagonal_sum(const EquivariantKernel<T>& kernel, const DeloneSegment& segment, double T_window) {
  const auto r = segment.window_range(T_window);
  const auto ctx = context_indices(kernel.table(), segment, r.begin, r.end);
  // Tally contexts first so exact arithmetic touches each context once.
  std::vector<long> tally(kernel.contexts(), 0);
  for (auto c : ctx) ++tally[c];
  T s(0);
  for (std::size_t c = 0; c < tally.size(); ++c)
    if (tally[c]) s += kernel.at(c, 0) * T(tally[c]);
  return s;
}

double windowed_poly_trace(const EquivariantKernel<double>& kernel, const DeloneSegment& segment, double T_window,
                           const std::vector<double>& coefficients, std::size_t chunk) {
  const auto r = segment.window_range(T_window);
  const std::size_t degree = coefficients.empty() ? 0 : coefficients.size() - 1;
  const std::size_t halo = degree * kernel.hop();
  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t pieces = (r.size() + chunk - 1) / chunk;
  std::vector<double> partial(pieces, 0.0);
  parallel_for(pieces, [&](std::size_t p) {
    const std::size_t s = r.begin + p * chunk;
    const std::size_t e = std::min(r.end, s + chunk);
    const std::size_t lo = s - std::min(halo, s - r.begin);
    const std::size_t hi = std::min(r.end, e + halo);
    auto m = restrict_range(kernel, segment, lo, hi);
    partial[p] = power_trace_rows(to_banded(m), coefficients, s - lo, e - lo);
  });
  double total = 0;
  for (double v : partial) total += v;
  return total;
}

void write_matrix_csv(const RestrictedMatrix<double>& m, std::ostream& out) {
  out << "i,j,value\n";
  const int w = static_cast<int>(m.bandwidth());
  char buf[96];
  for (std::size_t i = 0; i < m.dimension(); ++i)
    for (int d = -w; d <= w; ++d) {
      const long j = static_cast<long>(i) + d;
      if (j < 0 || j >= static_cast<long>(m.dimension())) continue;
      const double v = m.diagonal(d)[i];
      if (v == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%zu,%ld,%.12g\n", i, j, v);
      out << buf;
    }
}

#define TRACELAB_INSTANTIATE(T)                                                                                  \
  template class RestrictedMatrix<T>;                                                                            \
  template RestrictedMatrix<T> restrict_kernel(const EquivariantKernel<T>&, const DeloneSegment&, double);       \
  template RestrictedMatrix<T> restrict_range(const EquivariantKernel<T>&, const DeloneSegment&, std::size_t,    \
                                              std::size_t);                                                      \
  template T trace_restricted(const RestrictedMatrix<T>&);                                                       \
  template T poly_trace_power(const RestrictedMatrix<T>&, const std::vector<T>&);                               \
  template T windowed_diagonal_sum(const EquivariantKernel<T>&, const DeloneSegment&, double);

TRACELAB_INSTANTIATE(Rational)
TRACELAB_INSTANTIATE(double)
#undef TRACELAB_INSTANTIATE

}  // namespace tracelab
