#include "tracelab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tracelab {

namespace {

double growth(const BasisVector& b, double T) {
  double g = std::pow(T, b.exponent);
  if (b.log_power > 0) g *= std::pow(std::log(std::max(T, std::exp(1.0))), b.log_power);
  return g;
}

Real times(const Real& a, const Real& b) {
  if (a.exact && b.exact) return Real::from_exact(*a.exact * *b.exact);
  return Real::from_double(a.approx * b.approx);
}

Real minus(const Real& a, const Real& b) {
  if (a.exact && b.exact) return Real::from_exact(*a.exact - *b.exact);
  return Real::from_double(a.approx - b.approx);
}

int scale_count(const WindowFamily& family) { return family.n_max - family.n_min + 1; }

std::vector<double> to_double_poly(const RationalPolynomial& p) {
  std::vector<double> out;
  for (const auto& c : p) out.push_back(c.get_d());
  return out;
}

std::size_t poly_degree(const RationalPolynomial& p) {
  std::size_t d = p.size();
  while (d > 1 && sgn(p[d - 1]) == 0) --d;
  return d == 0 ? 0 : d - 1;
}

double max_T(const WindowFamily& family) {
  double m = 0.0;
  for (const auto& s : family.samples()) m = std::max(m, s.T);
  return m;
}

}  // namespace

std::string to_string(Convention c) {
  return c == Convention::kIntegerEigenvectors ? "integer-eigenvectors" : "unit-limsup";
}

TraceContext::TraceContext(const SubstitutionRule& rule, const Seed& seed)
    : language_(std::make_shared<const Language>(rule)),
      seed_(seed),
      structure_(eigen_structure(abelianize(rule))),
      counter_(rule, seed) {}

std::shared_ptr<const DeloneSegment> TraceContext::segment(double T, std::size_t margin) const {
  std::lock_guard<std::mutex> lock(segment_mutex_);
  if (segment_ && segment_->window() >= T && segment_margin_ >= margin) return segment_;
  double window = T;
  if (segment_) {
    window = std::max(window, segment_->window());
    margin = std::max(margin, segment_margin_);
  }
  segment_ = std::make_shared<const DeloneSegment>(build_segment(rule(), seed_, window, margin));
  segment_margin_ = margin;
  return segment_;
}

std::vector<long> TraceContext::context_tally(unsigned radius, double T) const {
  const auto key = std::make_pair(radius, T);
  {
    std::lock_guard<std::mutex> lock(tally_mutex_);
    auto it = tallies_.find(key);
    if (it != tallies_.end()) return it->second;
  }
  auto seg = segment(T, radius);
  const ContextTable& table = language_->contexts(radius);
  const auto r = seg->window_range(T);
  std::vector<long> tally(table.size(), 0);
  for (auto c : context_indices(table, *seg, r.begin, r.end)) ++tally[c];
  std::lock_guard<std::mutex> lock(tally_mutex_);
  return tallies_.emplace(key, std::move(tally)).first->second;
}

std::vector<Real> TraceContext::pairings(double T) const {
  const std::vector<long> n = counter_.counts(T);
  std::vector<Real> out;
  out.reserve(structure_.basis.size());
  for (const auto& b : structure_.basis) {
    if (b.vector.exact) {
      Rational s = 0;
      for (std::size_t l = 0; l < n.size(); ++l) s += (*b.vector.exact)[l] * n[l];
      out.push_back(Real::from_exact(s));
    } else {
      double s = 0.0;
      for (std::size_t l = 0; l < n.size(); ++l) s += b.vector.approx[l] * static_cast<double>(n[l]);
      out.push_back(Real::from_double(s));
    }
  }
  return out;
}

WindowTrace::WindowTrace(const TraceContext& context, EquivariantKernel<Rational> a, RationalPolynomial phi)
    : context_(&context), a_(std::move(a)), phi_(std::move(phi)) {
  if (phi_.empty()) phi_.push_back(0);
  image_ = poly_of_kernel(a_, phi_).compact();
  a_double_ = a_.cast<double>();
  phi_double_ = to_double_poly(phi_);
  if (poly_degree(phi_) <= 1 && image_.radius() == 0) {
    counting_ = true;
    for (std::size_t c = 0; c < image_.contexts(); ++c) letter_class_.push_back(image_.at(c, 0));
  }
}

Real WindowTrace::operator()(double T) const {
  if (counting_) {
    const auto n = context_->counter().counts(T);
    Rational s = 0;
    for (std::size_t l = 0; l < n.size(); ++l) s += letter_class_[l] * n[l];
    return Real::from_exact(s);
  }
  if (poly_degree(phi_) <= 1) {
    const auto tally = context_->context_tally(image_.radius(), T);
    Rational s = 0;
    for (std::size_t c = 0; c < tally.size(); ++c)
      if (tally[c]) s += image_.at(c, 0) * tally[c];
    return Real::from_exact(s);
  }
  auto seg = context_->segment(T, a_.radius() + 1);
  return Real::from_double(windowed_poly_trace(a_double_, *seg, T, phi_double_));
}

std::vector<Real> tau_values(const ClassVector& cls) {
  std::vector<Real> out;
  for (std::size_t i = 0; i < cls.alpha.size(); ++i) {
    if (cls.alpha.exact)
      out.push_back(Real::from_exact((*cls.alpha.exact)[i]));
    else
      out.push_back(Real::from_double(cls.alpha.approx[i]));
  }
  return out;
}

Real tau_exact(const ClassVector& cls, const EigenStructure& structure, const EigenIndex& index) {
  if (!structure.contains(index)) throw AnalysisError("index " + to_string(index) + " is not a basis index");
  const auto at = structure.at(index);
  if (!at.in_plus) throw AnalysisError("index outside I+: " + to_string(index));
  return tau_values(cls).at(structure.position(index));
}

std::size_t DeviationSeries::slot(const EigenIndex& index) const {
  for (std::size_t k = 0; k < indices.size(); ++k)
    if (indices[k] == index) return k;
  throw AnalysisError("index outside the series: " + to_string(index));
}

std::vector<EigenIndex> subtraction_order(const EigenStructure& structure) {
  std::vector<std::size_t> slots;
  for (std::size_t b = 0; b < structure.basis.size(); ++b)
    if (structure.basis[b].in_plus) slots.push_back(b);
  std::stable_sort(slots.begin(), slots.end(), [&](std::size_t x, std::size_t y) {
    const auto& bx = structure.basis[x];
    const auto& by = structure.basis[y];
    if (std::abs(bx.exponent - by.exponent) > 1e-12) return bx.exponent > by.exponent;
    return bx.log_power > by.log_power;
  });
  std::vector<EigenIndex> out;
  for (auto s : slots) out.push_back(structure.basis[s].index);
  return out;
}

DeviationSeries deviation_series(const TraceContext& context, const std::function<Real(double)>& raw,
                                 const std::vector<Real>& tau, const WindowFamily& family,
                                 std::optional<EigenIndex> up_to) {
  const EigenStructure& es = context.structure();
  if (scale_count(family) < 4) throw AnalysisError("schedule too short: need at least 4 scales");
  if (tau.size() != es.basis.size()) throw AnalysisError("tau values do not match the eigenbasis");
  DeviationSeries out;
  out.family = family;
  out.indices = subtraction_order(es);
  if (up_to) {
    auto it = std::find(out.indices.begin(), out.indices.end(), *up_to);
    if (it == out.indices.end()) throw AnalysisError("index outside I+: " + to_string(*up_to));
    out.indices.erase(it + 1, out.indices.end());
  }
  std::vector<std::size_t> pos;
  for (const auto& idx : out.indices) {
    pos.push_back(es.position(idx));
    out.tau.push_back(tau[pos.back()]);
    out.exponent.push_back(es.basis[pos.back()].exponent);
    out.log_power.push_back(es.basis[pos.back()].log_power);
  }
  const double vol0 = family.volume(1.0);
  for (const auto& sample : family.samples()) {
    SeriesRow row;
    row.sample = sample;
    row.raw = raw(sample.T);
    const auto pair = context.pairings(sample.T);
    Real rem = row.raw;
    for (std::size_t k = 0; k < pos.size(); ++k) {
      const double scale = vol0 * growth(es.basis[pos[k]], sample.T);
      row.psi.push_back(pair[pos[k]].approx / scale);
      row.remainder.push_back(rem.approx);
      row.normalized.push_back(rem.approx / scale);
      rem = minus(rem, times(out.tau[k], pair[pos[k]]));
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

DeviationSeries deviation_series(const TraceContext& context, const WindowTrace& trace, const WindowFamily& family,
                                 std::optional<EigenIndex> up_to) {
  const ClassVector cls = diagonal_class(trace.image(), context.structure());
  context.reserve(max_T(family), trace.base().radius() + 1);
  return deviation_series(
      context, [&](double T) { return trace(T); }, tau_values(cls), family, up_to);
}

PsiProfile psi_profile(const TraceContext& context, const EigenIndex& index, const WindowFamily& family) {
  const EigenStructure& es = context.structure();
  if (!es.contains(index) || !es.at(index).in_plus) throw AnalysisError("index outside I+: " + to_string(index));
  const std::size_t p = es.position(index);
  PsiProfile out;
  out.index = index;
  double sup = 0.0;
  for (const auto& sample : family.samples()) {
    const double v = context.pairings(sample.T)[p].approx / (family.volume(1.0) * growth(es.basis[p], sample.T));
    out.samples.push_back(sample);
    out.psi.push_back(v);
    sup = std::max(sup, std::abs(v));
    out.running_sup.push_back(sup);
  }
  return out;
}

LimsupEstimate limsup_estimate(const DeviationSeries& series, const EigenIndex& index, Convention convention) {
  const std::size_t k = series.slot(index);
  LimsupEstimate out;
  std::map<int, std::pair<double, double>> per_n;  // n -> (max |normalized|, max |psi|)
  for (const auto& row : series.rows) {
    auto& m = per_n[row.sample.n];
    m.first = std::max(m.first, std::abs(row.normalized[k]));
    m.second = std::max(m.second, std::abs(row.psi[k]));
  }
  for (const auto& [n, m] : per_n) {
    double v = m.first;
    if (convention == Convention::kIntegerEigenvectors) v = m.second > 0.0 ? m.first / m.second : 0.0;
    out.scales.push_back(n);
    out.per_scale.push_back(v);
  }
  if (out.per_scale.empty()) return out;
  out.value = out.per_scale.back();
  if (out.per_scale.size() >= 2) {
    const double prev = out.per_scale[out.per_scale.size() - 2];
    if (out.value != 0.0)
      out.diagnostic = std::abs(out.value - prev) / std::abs(out.value);
    else
      out.diagnostic = prev == 0.0 ? 0.0 : 1.0;
  }
  out.stabilized = out.diagnostic <= 0.1;
  return out;
}

ExponentFit fit_exponent(const std::vector<WindowSample>& samples, const std::vector<double>& values) {
  if (samples.size() != values.size()) throw AnalysisError("fit: samples and values differ in length");
  std::map<int, std::pair<double, double>> best;  // n -> (|value|, T)
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto& b = best[samples[i].n];
    if (std::abs(values[i]) > b.first) b = {std::abs(values[i]), samples[i].T};
  }
  ExponentFit fit;
  for (const auto& [n, b] : best) {
    if (b.first <= 0.0 || b.second <= 0.0) continue;
    fit.log_T.push_back(std::log(b.second));
    fit.log_value.push_back(std::log(b.first));
  }
  const std::size_t m = fit.log_T.size();
  if (m < 4) throw AnalysisError("fit: fewer than 4 nonzero scales (all-zero tail)");
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sx += fit.log_T[i];
    sy += fit.log_value[i];
  }
  const double mx = sx / static_cast<double>(m);
  const double my = sy / static_cast<double>(m);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (fit.log_T[i] - mx) * (fit.log_T[i] - mx);
    sxy += (fit.log_T[i] - mx) * (fit.log_value[i] - my);
  }
  fit.slope = sxx > 0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = fit.log_value[i] - (fit.intercept + fit.slope * fit.log_T[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / static_cast<double>(m));
  return fit;
}

double IDSCurve::operator()(double E) const {
  auto it = std::upper_bound(eigenvalues.begin(), eigenvalues.end(), E);
  return static_cast<double>(it - eigenvalues.begin()) / volume;
}

IDSCurve ids_curve(const EquivariantKernel<double>& kernel, const DeloneSegment& segment, double T) {
  if (!kernel.self_adjoint()) throw AnalysisError("operator is not self-adjoint");
  IDSCurve out;
  out.T = T;
  out.volume = 2.0 * T;
  out.eigenvalues = spectrum(restrict_kernel(kernel, segment, T));
  out.moments.assign(5, 0.0);
  for (double l : out.eigenvalues) {
    double p = 1.0;
    for (auto& m : out.moments) {
      m += p;
      p *= l;
    }
  }
  for (auto& m : out.moments) m /= out.volume;
  return out;
}

ShubinReport shubin_check(const TraceContext& context, const EquivariantKernel<Rational>& a,
                          const RationalPolynomial& phi, const WindowFamily& family,
                          std::optional<double> cross_check_T) {
  const WindowTrace trace(context, a, phi);
  const EigenStructure& es = context.structure();
  const ClassVector cls = diagonal_class(trace.image(), es);
  ShubinReport out;
  out.tau1 = tau_values(cls).at(es.position(subtraction_order(es).front()));
  double reach = max_T(family);
  if (cross_check_T) reach = std::max(reach, *cross_check_T);
  context.reserve(reach, std::max(a.radius(), trace.image().radius()) + 1);
  std::vector<WindowSample> samples;
  std::vector<double> gaps;
  for (const auto& sample : family.samples()) {
    ShubinRow row;
    row.sample = sample;
    row.rho = trace(sample.T).approx / family.volume(sample.T);
    row.gap = std::abs(row.rho - out.tau1.approx);
    samples.push_back(sample);
    gaps.push_back(row.gap);
    out.rows.push_back(row);
  }
  out.fit = fit_exponent(samples, gaps);
  const auto order = subtraction_order(es);
  out.expected_slope = order.size() > 1 ? es.at(order[1]).exponent - 1.0 : -1.0;
  if (cross_check_T) {
    out.cross_check_T = *cross_check_T;
    const auto tally = context.context_tally(trace.image().radius(), *cross_check_T);
    Rational s = 0;
    for (std::size_t c = 0; c < tally.size(); ++c)
      if (tally[c]) s += trace.image().at(c, 0) * tally[c];
    out.cross_check_average = s.get_d() / family.volume(*cross_check_T);
    const double ref = std::abs(out.tau1.approx);
    out.cross_check_relative = std::abs(out.cross_check_average - out.tau1.approx) / (ref > 0 ? ref : 1.0);
  }
  return out;
}

RefinedReport refined_shubin_check(const TraceContext& context, const EquivariantKernel<Rational>& a,
                                   const RationalPolynomial& phi, const EigenIndex& index,
                                   const WindowFamily& family, Convention convention) {
  const WindowTrace trace(context, a, phi);
  RefinedReport out;
  out.index = index;
  out.series = deviation_series(context, trace, family, index);
  out.expected = out.series.tau.at(out.series.slot(index));
  out.estimate = limsup_estimate(out.series, index, convention);
  double target = std::abs(out.expected.approx);
  if (convention == Convention::kUnitLimsup) {
    const std::size_t k = out.series.slot(index);
    const int last = out.series.family.n_max;
    double sup = 0.0;
    for (const auto& row : out.series.rows)
      if (row.sample.n == last) sup = std::max(sup, std::abs(row.psi[k]));
    target *= sup;
  }
  out.relative_error = std::abs(out.estimate.value - target) / (target > 0 ? target : 1.0);
  return out;
}

CommutatorReport commutator_trace_test(const TraceContext& context, const EquivariantKernel<Rational>& a,
                                       const EquivariantKernel<Rational>& b, const WindowFamily& family) {
  const auto c = (convolve(a, b) - convolve(b, a)).compact();
  const long h = static_cast<long>(std::min(a.hop(), b.hop()));
  context.reserve(max_T(family), c.radius() + 1);
  CommutatorReport out;
  out.exact_zero = true;
  long pairs = 0;
  for (const auto& sample : family.samples()) {
    const auto tally = context.context_tally(c.radius(), sample.T);
    Rational s = 0;
    for (std::size_t k = 0; k < tally.size(); ++k)
      if (tally[k]) s += c.at(k, 0) * tally[k];
    if (sgn(s) != 0) out.exact_zero = false;
    out.samples.push_back(sample);
    out.values.push_back(s.get_d());
    out.max_abs = std::max(out.max_abs, std::abs(s.get_d()));
    // straddling pairs (p inside, x outside) with |index(p) - index(x)| <= h
    const long n = static_cast<long>(context.segment(sample.T, 0)->window_range(sample.T).size());
    long here = 0;
    for (long d = 1; d <= h; ++d) here += 2 * std::min(d, n);
    pairs = std::max(pairs, here);
  }
  out.budget = 2.0 * static_cast<double>(pairs) * a.sup_norm() * b.sup_norm();
  return out;
}

RestrictionReport restriction_vs_algebra(const TraceContext& context, const EquivariantKernel<Rational>& a,
                                         const RationalPolynomial& phi, const WindowFamily& family) {
  const auto image = poly_of_kernel(a, phi).compact();
  const auto a_double = a.cast<double>();
  const auto coeffs = to_double_poly(phi);
  const std::size_t deg = poly_degree(phi);
  context.reserve(max_T(family), std::max(a.radius(), image.radius()) + 1);
  RestrictionReport out;
  std::size_t edge = 0;
  for (const auto& sample : family.samples()) {
    auto seg = context.segment(sample.T, a.radius() + 1);
    const double restricted = windowed_poly_trace(a_double, *seg, sample.T, coeffs);
    const auto tally = context.context_tally(image.radius(), sample.T);
    Rational s = 0;
    for (std::size_t k = 0; k < tally.size(); ++k)
      if (tally[k]) s += image.at(k, 0) * tally[k];
    out.samples.push_back(sample);
    out.restricted_first.push_back(restricted);
    out.algebra_first.push_back(s.get_d());
    out.difference.push_back(restricted - s.get_d());
    out.max_abs = std::max(out.max_abs, std::abs(out.difference.back()));
    const std::size_t n = seg->window_range(sample.T).size();
    edge = std::max(edge, std::min(n, 2 * deg * a.hop()));
  }
  double weight = 0.0;
  double norm_power = 1.0;
  for (const auto& ck : phi) {
    weight += std::abs(ck.get_d()) * norm_power;
    norm_power *= a.row_norm();
  }
  out.budget = static_cast<double>(edge) * 2.0 * weight;
  return out;
}

}  // namespace tracelab
