#include "tracelab/reports.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace tracelab {

const char* example_rule_text() {
  return "A -> ABA\n"
         "B -> ACA\n"
         "C -> ABBCBBCBBCBBA\n"
         "lengths 1 3 13\n";
}

std::string format_decimal(double v) {
  if (v == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

nlohmann::json to_json(const Real& v) {
  if (v.exact) return to_string(*v.exact);
  return v.approx;
}

nlohmann::json to_json(const RealVector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v.exact)
      out.push_back(to_string((*v.exact)[i]));
    else
      out.push_back(v.approx[i]);
  }
  return out;
}

nlohmann::json to_json(const ExponentFit& fit) {
  return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"residual", fit.residual},
          {"points", fit.log_T.size()}};
}

nlohmann::json to_json(const LimsupEstimate& est) {
  nlohmann::json per = nlohmann::json::array();
  for (std::size_t i = 0; i < est.scales.size(); ++i) per.push_back({{"n", est.scales[i]}, {"value", est.per_scale[i]}});
  return {{"estimate", est.value}, {"diagnostic", est.diagnostic}, {"stabilized", est.stabilized}, {"per_scale", per}};
}

namespace {

nlohmann::json complex_json(const Eigenvalue& e) {
  if (e.exact) return *e.exact;
  if (e.is_real()) return e.value.real();
  return {{"re", e.value.real()}, {"im", e.value.imag()}};
}

}  // namespace

nlohmann::json analyze_report(const SubstitutionRule& rule) {
  nlohmann::json out;
  out["alphabet"] = rule.glyphs();
  const IntMatrix m = abelianize(rule);
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(m.row(i));
  out["matrix"] = rows;
  const auto prim = check_primitive(m);
  out["primitive"] = prim.primitive;
  out["proper"] = check_proper(rule);
  out["lengths"] = to_json(rule.lengths());
  if (prim.primitive) {
    const auto perron = perron_data(rule);
    out["expansion"] = to_json(perron.expansion);
    out["frequencies"] = to_json(perron.frequencies);
    out["density"] = to_json(perron.density);
    out["periodic_hint"] = looks_periodic(rule);
  }
  const EigenStructure es = eigen_structure(m);
  nlohmann::json values = nlohmann::json::array();
  for (const auto& e : es.eigenvalues) values.push_back(complex_json(e));
  out["eigenvalues"] = values;
  nlohmann::json basis = nlohmann::json::array();
  nlohmann::json exponents = nlohmann::json::array();
  nlohmann::json plus = nlohmann::json::array();
  for (std::size_t b = 0; b < es.basis.size(); ++b) {
    const auto& v = es.basis[b];
    basis.push_back({{"index", to_string(v.index)},
                     {"eigenvalue", complex_json(v.eigenvalue)},
                     {"vector", to_json(v.vector)},
                     {"current", b < es.currents.size() ? to_json(es.currents[b]) : nlohmann::json()},
                     {"exponent", v.exponent},
                     {"log_power", v.log_power},
                     {"in_plus", v.in_plus}});
    exponents.push_back(v.exponent);
    if (v.in_plus) plus.push_back(to_string(v.index));
  }
  out["basis"] = basis;
  out["exponents"] = exponents;
  out["I_plus"] = plus;
  out["exact"] = es.exact;
  if (!es.warnings.empty()) out["warnings"] = es.warnings;
  return out;
}

void write_deviation_csv(const DeviationSeries& series, std::ostream& out) {
  out << "n,phase,T,raw";
  for (const char* prefix : {"remainder", "normalized"})
    for (const auto& idx : series.indices)
      out << ',' << prefix << '_' << idx.i << '_' << idx.j << '_' << idx.k;
  out << '\n';
  for (const auto& row : series.rows) {
    out << row.sample.n << ',' << row.sample.phase << ',' << format_decimal(row.sample.T) << ','
        << format_decimal(row.raw.approx);
    for (double v : row.remainder) out << ',' << format_decimal(v);
    for (double v : row.normalized) out << ',' << format_decimal(v);
    out << '\n';
  }
}

void write_series_psi_csv(const DeviationSeries& series, std::ostream& out) {
  out << "n,phase,T";
  for (const auto& idx : series.indices) out << ",psi_" << idx.i << '_' << idx.j << '_' << idx.k;
  out << '\n';
  for (const auto& row : series.rows) {
    out << row.sample.n << ',' << row.sample.phase << ',' << format_decimal(row.sample.T);
    for (double v : row.psi) out << ',' << format_decimal(v);
    out << '\n';
  }
}

void write_psi_csv(const PsiProfile& profile, std::ostream& out) {
  out << "n,phase,T,psi,running_sup\n";
  for (std::size_t i = 0; i < profile.samples.size(); ++i)
    out << profile.samples[i].n << ',' << profile.samples[i].phase << ',' << format_decimal(profile.samples[i].T)
        << ',' << format_decimal(profile.psi[i]) << ',' << format_decimal(profile.running_sup[i]) << '\n';
}

void write_ids_csv(const IDSCurve& curve, std::ostream& out) {
  out << "E,n\n";
  const auto& ev = curve.eigenvalues;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (i + 1 < ev.size() && ev[i + 1] == ev[i]) continue;
    out << format_decimal(ev[i]) << ',' << format_decimal(static_cast<double>(i + 1) / curve.volume) << '\n';
  }
}

namespace {

class Verifier {
 public:
  explicit Verifier(const VerifyOptions& o) : options_(o) {}

  void exact(const std::string& name, const Rational& expected, Rational actual) {
    if (options_.inject == name) actual += Rational(1) / 1000;
    rows_.push_back({name, to_string(expected), to_string(actual), actual == expected});
  }
  void approx(const std::string& name, double expected, double actual) {
    if (options_.inject == name) actual += 1e-3;
    const bool ok = std::abs(actual - expected) <= 1e-9 * std::max(1.0, std::abs(expected));
    rows_.push_back({name, format_decimal(expected), format_decimal(actual), ok});
  }
  void value(const std::string& name, const Rational& expected, const Real& actual) {
    if (!options_.floating && actual.exact)
      exact(name, expected, *actual.exact);
    else if (!options_.floating)
      rows_.push_back({name, to_string(expected), format_decimal(actual.approx) + " (not exact)", false});
    else
      approx(name, expected.get_d(), actual.approx);
  }
  void flag(const std::string& name, const std::string& expected, const std::string& actual, bool ok) {
    if (options_.inject == name) ok = false;
    rows_.push_back({name, expected, actual, ok});
  }
  std::vector<VerifyRow> rows() && { return std::move(rows_); }

 private:
  VerifyOptions options_;
  std::vector<VerifyRow> rows_;
};

std::string vector_text(const std::vector<double>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_decimal(v[i]);
  return s + ")";
}

bool proportional(const RealVector& v, const std::vector<long>& e, bool floating) {
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t j = 0; j < e.size(); ++j) {
      if (!floating && v.exact) {
        if ((*v.exact)[i] * e[j] != (*v.exact)[j] * e[i]) return false;
      } else if (std::abs(v.approx[i] * static_cast<double>(e[j]) - v.approx[j] * static_cast<double>(e[i])) >
                 1e-9 * 100) {
        return false;
      }
    }
  return true;
}

Rational q(long p, long d) { return Rational(p) / d; }

}  // namespace

std::vector<VerifyRow> verify_example(const VerifyOptions& options) {
  const SubstitutionRule rule = parse_rule(example_rule_text());
  const bool fl = options.floating;
  Verifier v(options);
  const IntMatrix m = abelianize(rule);
  const EigenStructure es = eigen_structure(m);

  const long expected_values[3] = {5, -2, 2};
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string name = "eigenvalue_" + std::to_string(i + 1);
    if (i >= es.eigenvalues.size()) {
      v.flag(name, std::to_string(expected_values[i]), "missing", false);
      continue;
    }
    const auto& e = es.eigenvalues[i];
    if (fl || !e.exact)
      v.approx(name, static_cast<double>(expected_values[i]), e.value.real() + std::abs(e.value.imag()));
    else
      v.exact(name, expected_values[i], *e.exact);
  }

  const std::vector<long> vectors[3] = {{1, 3, 13}, {1, -4, 6}, {-1, 0, 2}};
  for (std::size_t i = 0; i < 3; ++i) {
    const EigenIndex idx{static_cast<int>(i + 1), 1, 1};
    const std::string name = "eigenvector_" + std::to_string(i + 1);
    if (!es.contains(idx)) {
      v.flag(name, vector_text({}), "missing", false);
      continue;
    }
    const auto& b = es.at(idx);
    std::vector<double> e(vectors[i].begin(), vectors[i].end());
    v.flag(name, "proportional to " + vector_text(e), vector_text(b.vector.approx), proportional(b.vector, vectors[i], fl));
  }

  // lengths and the left eigenvector identity theta M = 5 theta
  const RealVector& theta = rule.lengths();
  const long lengths[3] = {1, 3, 13};
  for (std::size_t l = 0; l < 3; ++l)
    v.value("length_" + rule.glyph(static_cast<Letter>(l)), lengths[l],
            theta.exact ? Real::from_exact((*theta.exact)[l]) : Real::from_double(theta.approx[l]));
  for (std::size_t j = 0; j < 3; ++j) {
    Rational s = 0;
    double d = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      if (theta.exact) s += (*theta.exact)[i] * m(i, j);
      d += theta.approx[i] * static_cast<double>(m(i, j));
    }
    v.value("left_eigenvector_" + rule.glyph(static_cast<Letter>(j)), 5 * lengths[j],
            theta.exact ? Real::from_exact(s) : Real::from_double(d));
  }

  const PerronData perron = perron_data(rule);
  const Rational freqs[3] = {q(2, 21), q(2, 21), q(1, 21)};
  for (std::size_t l = 0; l < 3; ++l)
    v.value("frequency_" + rule.glyph(static_cast<Letter>(l)), freqs[l],
            perron.frequencies.exact ? Real::from_exact((*perron.frequencies.exact)[l])
                                     : Real::from_double(perron.frequencies.approx[l]));
  v.value("density", q(5, 21), perron.density);

  // currents through the class of each tile projection, and tau of the example operator
  auto language = std::make_shared<const Language>(rule);
  const Rational currents[3][3] = {{q(2, 21), q(2, 21), q(1, 21)},
                                   {q(1, 14), q(-5, 28), q(1, 28)},
                                   {q(-5, 6), q(-1, 12), q(1, 12)}};
  auto coordinate = [&](const ClassVector& cls, int i) -> Real {
    const EigenIndex idx{i, 1, 1};
    if (!es.contains(idx)) return Real::from_double(std::nan(""));
    if (auto x = cls.exact_coordinate(es, idx)) return Real::from_exact(*x);
    return Real::from_double(cls.coordinate(es, idx));
  };
  for (Letter l = 0; l < 3; ++l) {
    const ClassVector cls = fl ? diagonal_class(kernels::projection<double>(language, l), es)
                               : diagonal_class(kernels::projection<Rational>(language, l), es);
    for (int i = 1; i <= 3; ++i)
      v.value("current_" + std::to_string(i) + "_" + rule.glyph(l), currents[i - 1][l], coordinate(cls, i));
  }
  const ClassVector h = fl ? diagonal_class(kernels::h0<double>(language), es)
                           : diagonal_class(kernels::h0<Rational>(language), es);
  const Rational taus[3] = {0, q(-1, 14), q(-5, 6)};
  for (int i = 1; i <= 3; ++i) v.value("tau_" + std::to_string(i) + "_H0", taus[i - 1], coordinate(h, i));
  return std::move(v).rows();
}

}  // namespace tracelab
