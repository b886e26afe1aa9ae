/// Experiment drivers: uniform convergence studies, adaptive runs, the CSV
/// schema they emit, rate tables, and the plain key = value config format.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vvp/adapt.hpp"
#include "vvp/forms_cg.hpp"
#include "vvp/forms_dg.hpp"

namespace vvp {

/// One CSV row; level is the table level of a uniform study (the 2^N x 2^N
/// mesh) or the iteration number of an adaptive run.
struct RunRecord {
  int level = 0;
  int dofs_total = 0;
  double h = 0.0;
  ErrorReport errors;
  GlobalEstimate estimate;
  double efficiency = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
  bool converged = false;
};

/// Everything a run can configure; unset optionals fall back to the scheme
/// defaults derived from the problem (rho1 = 2 nu0 / 3, cg rho2 = nu0 / 10,
/// dg rho2 = nu0 / 4, penalties from default_stab_constants).
struct HarnessOptions {
  std::string problem = "ex51";
  std::string scheme = "cg";
  std::optional<int> k;          ///< dg polynomial degree; cg is fixed at 1
  std::vector<int> levels = {1, 2, 3, 4};
  double theta = 0.5;
  int max_dofs = 100000;
  std::optional<double> rho1, rho2;
  std::optional<double> a11, c11, d11;
  std::optional<double> gamma;
  double tol = 1e-8;
  std::string out;               ///< output dir; empty falls back to VVP_OUT then "."
  unsigned seed = 0;             ///< recorded only: every run is deterministic
  bool timing = true;            ///< false writes 0.000 in the seconds column
};

/// Table levels 1..n, the range the CLI count flag expands to.
inline std::vector<int> level_range(int n) {
  if (n < 1) throw std::invalid_argument("levels must be >= 1");
  std::vector<int> lv(n);
  for (int i = 0; i < n; ++i) lv[i] = i + 1;
  return lv;
}

namespace detail {

/// Options resolved against the named problem's coefficients.
struct ResolvedRun {
  Problem prob;
  double rho1 = 0.0, rho2 = 0.0;
  int k = 1;
  StabConstants stab{};
  FixedPointOptions fixed_point;
};

inline ResolvedRun resolve(const HarnessOptions& opt) {
  if (opt.scheme != "cg" && opt.scheme != "dg")
    throw std::invalid_argument("scheme must be cg or dg");
  if (!(opt.theta > 0.0 && opt.theta < 1.0))
    throw std::invalid_argument("theta must lie in (0, 1)");
  if (opt.levels.empty()) throw std::invalid_argument("levels must be >= 1");
  for (int lev : opt.levels)
    if (lev < 1) throw std::invalid_argument("levels must be >= 1");
  if (opt.max_dofs < 1) throw std::invalid_argument("max-dofs must be positive");
  if (opt.gamma && *opt.gamma <= 0.0) throw std::invalid_argument("gamma must be positive");
  if (!(opt.tol > 0.0)) throw std::invalid_argument("tol must be positive");

  const double nu0 = make_problem(opt.problem).coeff.nu0;  // also validates the name
  ResolvedRun run;
  run.rho1 = opt.rho1.value_or(2.0 * nu0 / 3.0);
  run.rho2 = opt.rho2.value_or(opt.scheme == "cg" ? 0.1 * nu0 : 0.25 * nu0);
  run.prob = make_problem(opt.problem, run.rho1);
  run.k = opt.k.value_or(opt.scheme == "cg" ? 1 : 0);
  if (opt.scheme == "cg" && run.k != 1) throw std::invalid_argument("cg supports k = 1 only");
  if (opt.scheme == "dg" && (run.k < 0 || run.k > 2))
    throw std::invalid_argument("dg supports k in {0, 1, 2}");
  if (opt.gamma) run.prob.coeff.gamma = *opt.gamma;
  run.stab = default_stab_constants(run.prob.coeff);
  if (opt.a11) run.stab.a11 = *opt.a11;
  if (opt.c11) run.stab.c11 = *opt.c11;
  if (opt.d11) run.stab.d11 = *opt.d11;
  run.fixed_point.tol = opt.tol;
  return run;
}

template <class SchemeFactory>
std::vector<RunRecord> uniform_study(const Problem& prob, const std::vector<int>& levels,
                                     SchemeFactory&& factory, const FixedPointOptions& fp,
                                     bool timing) {
  std::vector<RunRecord> records;
  for (int lev : levels) {
    const auto t0 = std::chrono::steady_clock::now();
    const Mesh mesh = generate(prob.domain, lev + 1);  // table level N is the 2^N grid
    const auto scheme = factory(mesh);
    const SolutionBundle bundle = fixed_point_solve(scheme, prob, FeFunction(scheme.control), fp);
    RunRecord rec;
    rec.level = lev;
    rec.dofs_total = scheme.layout.size;
    rec.h = mesh_size(mesh);
    rec.estimate = global_estimate(indicators(scheme, prob, bundle));
    rec.errors = error_report(scheme, prob, bundle);
    if (rec.errors.valid)
      rec.efficiency = efficiency_index(rec.estimate.eta_total, product_norm(rec.errors));
    rec.converged = bundle.converged;
    if (timing)
      rec.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    records.push_back(rec);
  }
  return records;
}

inline RunRecord from_step(const AdaptStep& step, bool timing) {
  RunRecord rec;
  rec.level = step.iteration;
  rec.dofs_total = step.dofs_total;
  rec.h = step.h_max;
  rec.estimate = step.estimate;
  rec.errors = step.errors;
  if (rec.errors.valid)
    rec.efficiency = efficiency_index(rec.estimate.eta_total, product_norm(rec.errors));
  rec.converged = step.converged;
  rec.seconds = timing ? step.seconds : 0.0;
  return rec;
}

}  // namespace detail

/// Uniform refinement study over the requested table levels.
inline std::vector<RunRecord> run_convergence(const HarnessOptions& opt) {
  const detail::ResolvedRun run = detail::resolve(opt);
  if (opt.scheme == "cg")
    return detail::uniform_study(run.prob, opt.levels,
                                 [&](const Mesh& m) { return CgScheme(m, run.rho1, run.rho2); },
                                 run.fixed_point, opt.timing);
  return detail::uniform_study(run.prob, opt.levels,
                               [&](const Mesh& m) {
                                 return DgScheme(m, run.k, run.rho1, run.rho2, run.stab.a11,
                                                 run.stab.c11, run.stab.d11);
                               },
                               run.fixed_point, opt.timing);
}

/// Adaptive run starting from the first requested level's mesh.
inline std::vector<RunRecord> run_adaptive(const HarnessOptions& opt) {
  const detail::ResolvedRun run = detail::resolve(opt);
  AdaptOptions aopt;
  aopt.theta = opt.theta;
  aopt.max_dofs = opt.max_dofs;
  aopt.fixed_point = run.fixed_point;
  const Mesh initial = generate(run.prob.domain, opt.levels.front() + 1);
  std::vector<AdaptStep> history;
  if (opt.scheme == "cg")
    history = adaptive_loop(run.prob, initial,
                            [&](const Mesh& m) { return CgScheme(m, run.rho1, run.rho2); }, aopt);
  else
    history = adaptive_loop(run.prob, initial,
                            [&](const Mesh& m) {
                              return DgScheme(m, run.k, run.rho1, run.rho2, run.stab.a11,
                                              run.stab.c11, run.stab.d11);
                            },
                            aopt);
  std::vector<RunRecord> records;
  records.reserve(history.size());
  for (const AdaptStep& step : history) records.push_back(detail::from_step(step, opt.timing));
  return records;
}

/// Worst relative mismatch between the assembled reduced gradient and central
/// finite differences of the reduced cost at step 1e-4, probed from a zero
/// control on the first requested level's mesh.
inline double gradient_check_run(const HarnessOptions& opt) {
  const detail::ResolvedRun run = detail::resolve(opt);
  const Mesh mesh = generate(run.prob.domain, opt.levels.front() + 1);
  const unsigned seed = opt.seed == 0 ? 1u : opt.seed;
  if (opt.scheme == "cg") {
    const CgScheme s(mesh, run.rho1, run.rho2);
    return gradient_check(s, run.prob, FeFunction(s.control), 1e-4, seed);
  }
  const DgScheme s(mesh, run.k, run.rho1, run.rho2, run.stab.a11, run.stab.c11, run.stab.d11);
  return gradient_check(s, run.prob, FeFunction(s.control), 1e-4, seed);
}

/// Bit-exact header of the experiment CSV.
inline const char* csv_header() {
  return "level,dofs_total,h,err_u,err_y_triple,err_w_triple,err_omega,err_theta,err_p,err_q,"
         "eta_y,eta_w,eta_u,eta_total,efficiency,seconds";
}

inline void write_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << csv_header() << '\n';
  char line[640];
  for (const RunRecord& r : records) {
    std::snprintf(line, sizeof line,
                  "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%.3f\n",
                  r.level, r.dofs_total, r.h, r.errors.u, r.errors.y_triple, r.errors.w_triple,
                  r.errors.omega, r.errors.theta, r.errors.p, r.errors.q, r.estimate.eta_y,
                  r.estimate.eta_w, r.estimate.eta_u, r.estimate.eta_total, r.efficiency,
                  r.seconds);
    os << line;
  }
}

/// Successive rates r_i = log(e_i / e_{i+1}) / log(h_i / h_{i+1}).
inline std::vector<double> rate_sequence(const std::vector<double>& e, const std::vector<double>& h) {
  std::vector<double> rates;
  for (size_t i = 0; i + 1 < e.size() && i + 1 < h.size(); ++i)
    rates.push_back(std::log(e[i] / e[i + 1]) / std::log(h[i] / h[i + 1]));
  return rates;
}

/// Error-and-rate table for a uniform study; columns with no exact solution
/// print nan, the first row has no rate.
inline void print_rate_table(std::ostream& os, const std::vector<RunRecord>& records) {
  const std::pair<const char*, double (*)(const RunRecord&)> columns[] = {
      {"e(u)", [](const RunRecord& r) { return r.errors.u; }},
      {"e(y)", [](const RunRecord& r) { return r.errors.y_triple; }},
      {"e(w)", [](const RunRecord& r) { return r.errors.w_triple; }},
      {"e(omega)", [](const RunRecord& r) { return r.errors.omega; }},
      {"e(p)", [](const RunRecord& r) { return r.errors.p; }},
      {"eta", [](const RunRecord& r) { return r.estimate.eta_total; }},
  };
  char buf[64];
  os << "level     dofs";
  for (const auto& [name, field] : columns) {
    std::snprintf(buf, sizeof buf, " %10s  rate", name);
    os << buf;
  }
  os << '\n';
  for (size_t i = 0; i < records.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%5d %8d", records[i].level, records[i].dofs_total);
    os << buf;
    for (const auto& [name, field] : columns) {
      const double e = field(records[i]);
      if (i == 0)
        std::snprintf(buf, sizeof buf, " %10.4g    --", e);
      else
        std::snprintf(buf, sizeof buf, " %10.4g %5.2f",
                      e, std::log(field(records[i - 1]) / e) /
                             std::log(records[i - 1].h / records[i].h));
      os << buf;
    }
    os << '\n';
  }
}

/// Plain `key = value` config lines ('#' comments, blank lines ignored),
/// returned in file order; malformed lines throw.
inline std::vector<std::pair<std::string, std::string>> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  while (std::getline(in, line)) {
    const std::string stripped = trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line is not key = value: " + line);
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config line is not key = value: " + line);
    entries.emplace_back(key, value);
  }
  return entries;
}

/// Apply one config entry; keys mirror the CLI flag names.
inline void apply_config(HarnessOptions& opt, const std::string& key, const std::string& value) {
  auto as_double = [&] {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("bad number for " + key + ": " + value);
    return v;
  };
  auto as_int = [&] {
    size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("bad integer for " + key + ": " + value);
    return v;
  };
  if (key == "problem") opt.problem = value;
  else if (key == "scheme") opt.scheme = value;
  else if (key == "k") opt.k = as_int();
  else if (key == "levels") opt.levels = level_range(as_int());
  else if (key == "theta") opt.theta = as_double();
  else if (key == "max-dofs") opt.max_dofs = as_int();
  else if (key == "rho1") opt.rho1 = as_double();
  else if (key == "rho2") opt.rho2 = as_double();
  else if (key == "a11") opt.a11 = as_double();
  else if (key == "c11") opt.c11 = as_double();
  else if (key == "d11") opt.d11 = as_double();
  else if (key == "gamma") opt.gamma = as_double();
  else if (key == "tol") opt.tol = as_double();
  else if (key == "out") opt.out = value;
  else if (key == "seed") opt.seed = static_cast<unsigned>(as_int());
  else if (key == "no-timing") opt.timing = !(value == "1" || value == "true");
  else throw std::invalid_argument("unknown config key: " + key);
}

/// Coefficient ranges behind the well-posedness assumptions, sampled on a
/// fine mesh of the problem domain.
inline void print_assumption_report(std::ostream& os, const Problem& prob) {
  const Mesh mesh = generate(prob.domain, 5);
  const TriangleRule rule = triangle_rule(4);
  double nu_min = std::numeric_limits<double>::infinity(), nu_max = -nu_min;
  double coer_min = nu_min, beta_max = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map(mesh, c);
    for (const auto& qp : rule.points) {
      const Vec2 x = map.to_physical(qp);
      const double nu = prob.coeff.nu(x);
      nu_min = std::min(nu_min, nu);
      nu_max = std::max(nu_max, nu);
      coer_min = std::min(coer_min, prob.coeff.sigma(x) - 0.5 * prob.coeff.div_beta(x));
      beta_max = std::max(beta_max, norm(prob.coeff.beta(x)));
    }
  }
  char buf[256];
  std::snprintf(buf, sizeof buf, "problem            %s\n", prob.name.c_str());
  os << buf;
  std::snprintf(buf, sizeof buf, "nu sampled range   [%g, %g] in declared [%g, %g]\n", nu_min,
                nu_max, prob.coeff.nu0, prob.coeff.nu1);
  os << buf;
  std::snprintf(buf, sizeof buf, "min sigma - div(beta)/2   %g (needs >= 0)\n", coer_min);
  os << buf;
  std::snprintf(buf, sizeof buf, "max |beta|         %g\n", beta_max);
  os << buf;
  std::snprintf(buf, sizeof buf, "gamma              %g\n", prob.coeff.gamma);
  os << buf;
  std::snprintf(buf, sizeof buf, "control box        [%g, %g] x [%g, %g]\n", prob.coeff.lower.x,
                prob.coeff.upper.x, prob.coeff.lower.y, prob.coeff.upper.y);
  os << buf;
  std::snprintf(buf, sizeof buf, "exact solution     %s\n", prob.has_exact ? "yes" : "no");
  os << buf;
}

}  // namespace vvp
