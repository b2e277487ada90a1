#pragma once

#include "tracelab/classes.hpp"
#include "tracelab/delone.hpp"
#include "tracelab/eigen_structure.hpp"
#include "tracelab/kernel.hpp"
#include "tracelab/polynomial.hpp"
#include "tracelab/restricted.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tracelab {

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// How eigen-coordinates are scaled. kIntegerEigenvectors pairs classes with
// the integer eigenvectors of the example (tau_2(V_B) = -5/28, ...).
// kUnitLimsup rescales each index so that limsup |Psi| = 1.
enum class Convention { kIntegerEigenvectors, kUnitLimsup };
std::string to_string(Convention c);

// Rule, seed and everything derived from them that the analyses share.
class TraceContext {
 public:
  TraceContext(const SubstitutionRule& rule, const Seed& seed);

  const SubstitutionRule& rule() const { return language_->rule(); }
  const Seed& seed() const { return seed_; }
  const std::shared_ptr<const Language>& language() const { return language_; }
  const EigenStructure& structure() const { return structure_; }
  const SupertileCounter& counter() const { return counter_; }

  // A segment covering [-T, T] plus margin points. One segment is shared
  // and rebuilt only when a larger one is requested; reserve() up front
  // avoids rebuilding along a schedule.
  std::shared_ptr<const DeloneSegment> segment(double T, std::size_t margin) const;
  void reserve(double T, std::size_t margin) const { segment(T, margin); }

  // Number of window points in each radius-r context (memoized).
  std::vector<long> context_tally(unsigned radius, double T) const;

  // <v_b, N(T)> for every basis vector b, with N(T) the letter counts of
  // the window. Exact when the basis is.
  std::vector<Real> pairings(double T) const;

 private:
  std::shared_ptr<const Language> language_;
  Seed seed_;
  EigenStructure structure_;
  SupertileCounter counter_;
  mutable std::mutex segment_mutex_;
  mutable std::mutex tally_mutex_;
  mutable std::shared_ptr<const DeloneSegment> segment_;
  mutable std::size_t segment_margin_ = 0;
  mutable std::map<std::pair<unsigned, double>, std::vector<long>> tallies_;
};

// tr(phi(A|_[-T,T])). Degree <= 1 uses letter counts (radius 0) or a
// context tally; higher degrees use the banded power path on the shared
// segment.
class WindowTrace {
 public:
  WindowTrace(const TraceContext& context, EquivariantKernel<Rational> a, RationalPolynomial phi);

  Real operator()(double T) const;
  const EquivariantKernel<Rational>& base() const { return a_; }
  const RationalPolynomial& phi() const { return phi_; }
  // phi(A) in the kernel algebra.
  const EquivariantKernel<Rational>& image() const { return image_; }
  bool counting() const { return counting_; }
  std::size_t degree() const { return phi_.empty() ? 0 : phi_.size() - 1; }

 private:
  const TraceContext* context_;
  EquivariantKernel<Rational> a_;
  RationalPolynomial phi_;
  EquivariantKernel<Rational> image_;
  EquivariantKernel<double> a_double_;
  std::vector<double> phi_double_;
  bool counting_ = false;
  RationalVector letter_class_;
};

// tau at every basis index, in EigenStructure::basis order.
std::vector<Real> tau_values(const ClassVector& cls);
Real tau_exact(const ClassVector& cls, const EigenStructure& structure, const EigenIndex& index);

struct SeriesRow {
  WindowSample sample;
  Real raw;
  std::vector<double> psi;         // per series index
  std::vector<double> remainder;   // raw minus the terms ordered before the index
  std::vector<double> normalized;  // remainder / (|B_0| L(i, j, T) T^s_i)
};

struct DeviationSeries {
  WindowFamily family;
  std::vector<EigenIndex> indices;  // I+ in subtraction order
  std::vector<Real> tau;            // per series index
  std::vector<double> exponent;
  std::vector<int> log_power;
  std::vector<SeriesRow> rows;      // ordered like family.samples()

  std::size_t slot(const EigenIndex& index) const;
};

// I+ ordered by decreasing growth L(i, j, T) T^s_i; equal growth keeps
// basis order.
std::vector<EigenIndex> subtraction_order(const EigenStructure& structure);

// Requires at least 4 scales. tau holds values for every basis index;
// indices after up_to are dropped.
DeviationSeries deviation_series(const TraceContext& context, const std::function<Real(double)>& raw,
                                 const std::vector<Real>& tau, const WindowFamily& family,
                                 std::optional<EigenIndex> up_to = std::nullopt);
DeviationSeries deviation_series(const TraceContext& context, const WindowTrace& trace, const WindowFamily& family,
                                 std::optional<EigenIndex> up_to = std::nullopt);

struct PsiProfile {
  EigenIndex index;
  std::vector<WindowSample> samples;
  std::vector<double> psi;
  std::vector<double> running_sup;  // over samples so far, by |Psi|
};

// Psi(T) = <v, N(T)> / (|B_0| L(i, j, T) T^s). Throws AnalysisError for
// indices outside I+.
PsiProfile psi_profile(const TraceContext& context, const EigenIndex& index, const WindowFamily& family);

struct LimsupEstimate {
  double value = 0.0;       // estimate of |tau| under the chosen convention
  double diagnostic = 0.0;  // relative change of the estimate between the last two scales
  bool stabilized = false;  // diagnostic <= 0.1
  std::vector<int> scales;
  std::vector<double> per_scale;  // estimate at each scale
};

// Per scale n: max over phases of |normalized remainder|. Under
// kIntegerEigenvectors this is divided by the same max of |Psi|.
LimsupEstimate limsup_estimate(const DeviationSeries& series, const EigenIndex& index,
                               Convention convention = Convention::kIntegerEigenvectors);

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root mean square in log space
  std::vector<double> log_T;
  std::vector<double> log_value;
};

// Least squares of log|value| against log T using, for each scale, the
// sample with the largest |value|. Needs at least 4 nonzero scales.
ExponentFit fit_exponent(const std::vector<WindowSample>& samples, const std::vector<double>& values);

struct IDSCurve {
  double T = 0.0;
  double volume = 0.0;
  std::vector<double> eigenvalues;  // ascending
  std::vector<double> moments;      // rho_T(x^m), m = 0 .. 4
  double mass() const { return static_cast<double>(eigenvalues.size()) / volume; }
  // n_T(E) = #{lambda <= E} / Vol(B_T)
  double operator()(double E) const;
};

IDSCurve ids_curve(const EquivariantKernel<double>& kernel, const DeloneSegment& segment, double T);

struct ShubinRow {
  WindowSample sample;
  double rho = 0.0;  // tr(phi(A|_B)) / Vol(B_T)
  double gap = 0.0;  // |rho - tau_1(phi(A))|
};

struct ShubinReport {
  Real tau1;
  std::vector<ShubinRow> rows;
  ExponentFit fit;
  double expected_slope = 0.0;  // s_2 - 1, or -1 when I+ has one index
  double cross_check_T = 0.0;
  double cross_check_average = 0.0;  // tr(phi(A)|_B) / Vol(B_T)
  double cross_check_relative = 0.0;
};

ShubinReport shubin_check(const TraceContext& context, const EquivariantKernel<Rational>& a,
                          const RationalPolynomial& phi, const WindowFamily& family,
                          std::optional<double> cross_check_T = std::nullopt);

struct RefinedReport {
  EigenIndex index;
  Real expected;  // tau_index(phi(A))
  DeviationSeries series;
  LimsupEstimate estimate;
  double relative_error = 0.0;  // | estimate - |expected| | / |expected|
};

RefinedReport refined_shubin_check(const TraceContext& context, const EquivariantKernel<Rational>& a,
                                   const RationalPolynomial& phi, const EigenIndex& index,
                                   const WindowFamily& family, Convention convention = Convention::kIntegerEigenvectors);

struct CommutatorReport {
  std::vector<WindowSample> samples;
  std::vector<double> values;  // sum over window points of (ab - ba)(p, p)
  double max_abs = 0.0;
  double budget = 0.0;
  bool exact_zero = false;  // every value is exactly 0
  bool bounded() const { return max_abs <= budget; }
};

// Budget: pairs (p, x) straddling a window edge within h = min(hop_a, hop_b)
// hops, counted on both edges and in both orders, times sup|a| sup|b|.
CommutatorReport commutator_trace_test(const TraceContext& context, const EquivariantKernel<Rational>& a,
                                       const EquivariantKernel<Rational>& b, const WindowFamily& family);

struct RestrictionReport {
  std::vector<WindowSample> samples;
  std::vector<double> restricted_first;  // tr(phi(A|_B))
  std::vector<double> algebra_first;     // tr(phi(A)|_B)
  std::vector<double> difference;
  double max_abs = 0.0;
  double budget = 0.0;
  bool bounded() const { return max_abs <= budget; }
};

// Budget: points within deg * hop of either edge, times
// 2 sum_k |c_k| row_norm(A)^k.
RestrictionReport restriction_vs_algebra(const TraceContext& context, const EquivariantKernel<Rational>& a,
                                         const RationalPolynomial& phi, const WindowFamily& family);

}  // namespace tracelab
