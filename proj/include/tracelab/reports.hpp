#pragma once

#include "tracelab/analysis.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace tracelab {

// The three-letter rule of the worked example, with lengths (1, 3, 13).
const char* example_rule_text();

// 12 significant digits, as used in every CSV.
std::string format_decimal(double v);

// "p/q" when exact, else the decimal value.
nlohmann::json to_json(const Real& v);
nlohmann::json to_json(const RealVector& v);
nlohmann::json to_json(const ExponentFit& fit);
nlohmann::json to_json(const LimsupEstimate& est);

// Matrix, eigen data, I+ membership, exponents, properness and primitivity.
nlohmann::json analyze_report(const SubstitutionRule& rule);

// Columns n,phase,T,raw then remainder_ and normalized_ per series index.
void write_deviation_csv(const DeviationSeries& series, std::ostream& out);
// Columns n,phase,T then psi_ per series index.
void write_series_psi_csv(const DeviationSeries& series, std::ostream& out);
// Columns n,phase,T,psi,running_sup.
void write_psi_csv(const PsiProfile& profile, std::ostream& out);
// Columns E,n: the value of n_T after each distinct eigenvalue.
void write_ids_csv(const IDSCurve& curve, std::ostream& out);

struct VerifyRow {
  std::string name;
  std::string expected;
  std::string actual;
  bool pass = false;
};

struct VerifyOptions {
  bool floating = false;   // decimal paths, tolerance 1e-9
  std::string inject;      // perturb the named constant by 1/1000
};

// Every constant of the worked example, computed from scratch.
std::vector<VerifyRow> verify_example(const VerifyOptions& options = {});

}  // namespace tracelab
