#include "tracelab/analysis.hpp"
#include "tracelab/opspec.hpp"
#include "tracelab/reports.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace tracelab;
namespace fs = std::filesystem;

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string rule_path;
  std::string seed;
  int n_min = 1;
  int n_max = 10;
  int phases = 8;
  std::string op;
  std::string out = ".";
  bool exact = false;
  bool floating = false;
  unsigned degree_cap = 4;
  std::string T = "5^5";
  std::string phi;
  std::string inject;
};

void add_common(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--rule", c.rule_path, "Rule file (default: the built-in three-letter example)");
  cmd->add_option("--seed", c.seed, "Seed letters L-,L+");
  cmd->add_option("--out", c.out, "Output directory");
  auto* ex = cmd->add_flag("--exact", c.exact, "Exact rational arithmetic (default)");
  auto* fl = cmd->add_flag("--float", c.floating, "Floating-point arithmetic");
  ex->excludes(fl);
}

void add_schedule(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--nmin", c.n_min, "Smallest scale n")->check(CLI::NonNegativeNumber);
  cmd->add_option("--nmax", c.n_max, "Largest scale n");
  cmd->add_option("--phases", c.phases, "Phases per scale")->check(CLI::PositiveNumber);
}

SubstitutionRule load_rule(const RunConfig& c) {
  if (c.rule_path.empty()) return parse_rule(example_rule_text());
  return load_rule_file(c.rule_path);
}

Seed load_seed(const RunConfig& c, const SubstitutionRule& rule) {
  std::string text = c.seed;
  if (text.empty()) {
    if (c.rule_path.empty()) return admissible_seed(rule, 0, 1);
    for (Letter a = 0; a < rule.size(); ++a)
      for (Letter b = 0; b < rule.size(); ++b) {
        try {
          return admissible_seed(rule, a, b);
        } catch (const RuleError&) {
        }
      }
    throw InputError("no legal nesting seed; pass --seed");
  }
  auto comma = text.find(',');
  if (comma == std::string::npos) throw InputError("--seed expects L-,L+");
  return admissible_seed(rule, rule.letter(text.substr(0, comma)), rule.letter(text.substr(comma + 1)));
}

double parse_T(const std::string& s) {
  try {
    if (auto caret = s.find('^'); caret != std::string::npos)
      return std::pow(std::stod(s.substr(0, caret)), std::stod(s.substr(caret + 1)));
    return std::stod(s);
  } catch (const std::exception&) {
    throw InputError("bad window size '" + s + "'");
  }
}

RationalPolynomial parse_phi(const std::string& s, unsigned cap) {
  RationalPolynomial p;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) p.push_back(parse_rational(item));
  if (p.empty()) throw InputError("--phi needs at least one coefficient");
  while (p.size() > 1 && sgn(p.back()) == 0) p.pop_back();
  if (p.size() - 1 > cap)
    throw InputError("polynomial degree " + std::to_string(p.size() - 1) + " exceeds --degree-cap " +
                     std::to_string(cap));
  return p;
}

WindowFamily schedule(const RunConfig& c, const TraceContext& ctx) {
  if (c.n_max < 2) throw InputError("--nmax must be at least 2");
  if (c.n_min > c.n_max) throw InputError("--nmin exceeds --nmax");
  return geometric_schedule(perron_data(ctx.rule()).expansion.approx, c.n_min, c.n_max, c.phases);
}

fs::path out_file(const RunConfig& c, const std::string& name) {
  fs::create_directories(c.out);
  return fs::path(c.out) / name;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw InputError("cannot write " + p.string());
  f << text;
}

int cmd_analyze(const RunConfig& c) {
  const auto rule = load_rule(c);
  const std::string text = analyze_report(rule).dump(2) + "\n";
  write_text(out_file(c, "analysis.json"), text);
  std::cout << text;
  return 0;
}

int cmd_generate(const RunConfig& c) {
  const auto rule = load_rule(c);
  const double T = parse_T(c.T);
  const auto seg = build_segment(rule, load_seed(c, rule), T);
  std::ostringstream csv;
  write_segment_csv(seg, T, csv);
  const auto path = out_file(c, "segment.csv");
  write_text(path, csv.str());
  const auto r = seg.window_range(T);
  std::cout << "points " << r.size() << " in [-" << format_decimal(T) << ", " << format_decimal(T) << "] -> "
            << path.string() << "\n";
  return 0;
}

int cmd_trace(const RunConfig& c) {
  const auto rule = load_rule(c);
  const TraceContext ctx(rule, load_seed(c, rule));
  const std::string op_text = load_operator_text(c.op);
  const auto a = compile_operator(op_text, ctx.language());
  const auto phi = parse_phi(c.phi.empty() ? "0,1" : c.phi, c.degree_cap);
  const auto family = schedule(c, ctx);
  const WindowTrace trace(ctx, a, phi);
  const auto series = deviation_series(ctx, trace, family);

  std::ostringstream csv;
  write_deviation_csv(series, csv);
  write_text(out_file(c, "deviation.csv"), csv.str());
  std::ostringstream psi;
  write_series_psi_csv(series, psi);
  write_text(out_file(c, "psi.csv"), psi.str());

  const auto& es = ctx.structure();
  const ClassVector cls = c.floating ? diagonal_class(trace.image().cast<double>(), es) : diagonal_class(trace.image(), es);
  const auto taus = tau_values(cls);
  nlohmann::json report;
  report["operator"] = op_text;
  report["phi"] = to_json(RealVector::from_exact(phi));
  report["mode"] = c.floating ? "float" : "exact";
  report["schedule"] = {{"expansion", family.expansion}, {"n_min", family.n_min}, {"n_max", family.n_max},
                        {"phases", family.phases}};
  report["class_radius"] = cls.radius;
  report["spectrum_separated"] = cls.spectrum_separated;
  nlohmann::json indices = nlohmann::json::array();
  for (std::size_t k = 0; k < series.indices.size(); ++k) {
    const auto& idx = series.indices[k];
    const Real tau = taus[es.position(idx)];
    nlohmann::json row = {{"index", to_string(idx)},
                          {"exponent", series.exponent[k]},
                          {"tau", to_json(tau)},
                          {"tau_decimal", tau.approx},
                          {"limsup", to_json(limsup_estimate(series, idx, Convention::kIntegerEigenvectors))},
                          {"limsup_unit", to_json(limsup_estimate(series, idx, Convention::kUnitLimsup))}};
    std::vector<WindowSample> samples;
    std::vector<double> values;
    for (const auto& r : series.rows) {
      samples.push_back(r.sample);
      values.push_back(r.remainder[k]);
    }
    try {
      row["fit"] = to_json(fit_exponent(samples, values));
    } catch (const AnalysisError&) {
      row["fit"] = nullptr;
    }
    indices.push_back(row);
  }
  report["indices"] = indices;
  const std::string text = report.dump(2) + "\n";
  write_text(out_file(c, "trace.json"), text);
  std::cout << text;
  return 0;
}

int cmd_ids(const RunConfig& c) {
  const auto rule = load_rule(c);
  const TraceContext ctx(rule, load_seed(c, rule));
  const std::string op_text = load_operator_text(c.op);
  const auto a = compile_operator(op_text, ctx.language());
  if (!a.self_adjoint()) throw InputError("operator is not self-adjoint");
  const double T = parse_T(c.T);
  const auto seg = ctx.segment(T, a.radius() + 1);
  const auto curve = ids_curve(a.cast<double>(), *seg, T);
  std::ostringstream csv;
  write_ids_csv(curve, csv);
  write_text(out_file(c, "ids.csv"), csv.str());

  const auto phi = parse_phi(c.phi.empty() ? "0,0,1" : c.phi, c.degree_cap);
  const auto family = schedule(c, ctx);
  nlohmann::json report;
  report["operator"] = op_text;
  report["T"] = T;
  report["points"] = curve.eigenvalues.size();
  report["mass"] = curve.mass();
  report["moments"] = curve.moments;
  try {
    const auto shubin = shubin_check(ctx, a, phi, family);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : shubin.rows)
      rows.push_back({{"n", r.sample.n}, {"phase", r.sample.phase}, {"T", r.sample.T}, {"rho", r.rho}, {"gap", r.gap}});
    report["shubin"] = {{"phi", to_json(RealVector::from_exact(phi))},
                        {"tau1", to_json(shubin.tau1)},
                        {"fit", to_json(shubin.fit)},
                        {"expected_slope", shubin.expected_slope},
                        {"rows", rows}};
  } catch (const AnalysisError& e) {
    report["shubin"] = {{"error", e.what()}};
  }
  const std::string text = report.dump(2) + "\n";
  write_text(out_file(c, "moments.json"), text);
  std::cout << "points " << curve.eigenvalues.size() << " mass " << format_decimal(curve.mass()) << "\n";
  return 0;
}

int cmd_verify(const RunConfig& c) {
  VerifyOptions o;
  o.floating = c.floating;
  o.inject = c.inject;
  const auto rows = verify_example(o);
  bool ok = true;
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  for (const auto& r : rows) {
    std::printf("%s  %-*s  expected %s  got %s\n", r.pass ? "PASS" : "FAIL", static_cast<int>(width), r.name.c_str(),
                r.expected.c_str(), r.actual.c_str());
    ok = ok && r.pass;
  }
  if (c.floating) std::printf("floating mode: tolerance 1e-9 relative\n");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace hierarchy of one-dimensional substitution tilings"};
  app.require_subcommand(1);
  RunConfig c;

  auto* analyze = app.add_subcommand("analyze", "Eigen report of the substitution matrix");
  add_common(analyze, c);

  auto* generate = app.add_subcommand("generate", "Points of the tiling in [-T, T] as CSV");
  add_common(generate, c);
  generate->add_option("--T", c.T, "Window half-width, e.g. 625 or 5^4")->required();

  auto* trace = app.add_subcommand("trace", "Deviation series and asymptotic traces of an operator");
  add_common(trace, c);
  add_schedule(trace, c);
  trace->add_option("--op", c.op, "Operator expression or file")->required();
  trace->add_option("--phi", c.phi, "Polynomial coefficients c0,c1,... (default x)");
  trace->add_option("--degree-cap", c.degree_cap, "Largest polynomial degree");

  auto* ids = app.add_subcommand("ids", "Integrated density of states and moment convergence");
  add_common(ids, c);
  add_schedule(ids, c);
  ids->add_option("--op", c.op, "Operator expression or file")->required();
  ids->add_option("--T", c.T, "Window half-width for the spectrum (default 5^5)");
  ids->add_option("--phi", c.phi, "Polynomial for the moment check (default x^2)");
  ids->add_option("--degree-cap", c.degree_cap, "Largest polynomial degree");

  auto* verify = app.add_subcommand("verify-example", "Check every constant of the worked example");
  auto* vf = verify->add_flag("--float", c.floating, "Use the floating-point paths");
  verify->add_flag("--exact", c.exact, "Use exact arithmetic (default)")->excludes(vf);
  verify->add_option("--inject", c.inject, "Perturb the named constant (harness check)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*analyze) return cmd_analyze(c);
    if (*generate) return cmd_generate(c);
    if (*trace) return cmd_trace(c);
    if (*ids) return cmd_ids(c);
    if (*verify) return cmd_verify(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
