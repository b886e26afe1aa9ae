/// Command-line driver: convergence and adaptive experiment runs, coefficient
/// assumption reports, and the finite-difference check of the reduced gradient.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vvp/harness.hpp"

namespace {

/// One shared flag set per subcommand; only flags the user passed are applied
/// on top of config-file values, so flags win over the file.
struct CommonFlags {
  std::string problem, scheme, out;
  int k = 0, levels = 0, max_dofs = 0;
  double theta = 0.0, rho1 = 0.0, rho2 = 0.0, a11 = 0.0, c11 = 0.0, d11 = 0.0;
  double gamma = 0.0, tol = 0.0;
  unsigned seed = 0;
  bool no_timing = false;
  CLI::Option *o_problem = nullptr, *o_scheme = nullptr, *o_k = nullptr, *o_levels = nullptr,
              *o_theta = nullptr, *o_max_dofs = nullptr, *o_rho1 = nullptr, *o_rho2 = nullptr,
              *o_a11 = nullptr, *o_c11 = nullptr, *o_d11 = nullptr, *o_gamma = nullptr,
              *o_tol = nullptr, *o_out = nullptr, *o_seed = nullptr, *o_no_timing = nullptr;

  void attach(CLI::App* cmd) {
    o_problem = cmd->add_option("--problem", problem, "problem name (ex51, ex52, ex53_l, ex53_t)");
    o_scheme = cmd->add_option("--scheme", scheme, "discretization, cg or dg");
    o_k = cmd->add_option("--k", k, "dg polynomial degree in {0, 1, 2}; cg is fixed at 1");
    o_levels = cmd->add_option("--levels", levels, "table levels to run (1..L)");
    o_theta = cmd->add_option("--theta", theta, "bulk marking fraction in (0, 1)");
    o_max_dofs = cmd->add_option("--max-dofs", max_dofs, "adaptive budget on coupled unknowns");
    o_rho1 = cmd->add_option("--rho1", rho1, "curl augmentation weight (default 2 nu0 / 3)");
    o_rho2 = cmd->add_option("--rho2", rho2, "divergence augmentation weight");
    o_a11 = cmd->add_option("--a11", a11, "normal velocity jump penalty");
    o_c11 = cmd->add_option("--c11", c11, "tangential velocity jump penalty");
    o_d11 = cmd->add_option("--d11", d11, "pressure jump penalty");
    o_gamma = cmd->add_option("--gamma", gamma, "control cost weight");
    o_tol = cmd->add_option("--tol", tol, "fixed-point tolerance on control increments");
    o_out = cmd->add_option("--out", out, "output directory (default $VVP_OUT, then .)");
    o_seed = cmd->add_option("--seed", seed, "run tag; all runs are deterministic");
    o_no_timing = cmd->add_flag("--no-timing", no_timing, "write 0.000 in the seconds column");
  }

  void apply(vvp::HarnessOptions& opts) const {
    if (o_problem->count()) opts.problem = problem;
    if (o_scheme->count()) opts.scheme = scheme;
    if (o_k->count()) opts.k = k;
    if (o_levels->count()) opts.levels = vvp::level_range(levels);
    if (o_theta->count()) opts.theta = theta;
    if (o_max_dofs->count()) opts.max_dofs = max_dofs;
    if (o_rho1->count()) opts.rho1 = rho1;
    if (o_rho2->count()) opts.rho2 = rho2;
    if (o_a11->count()) opts.a11 = a11;
    if (o_c11->count()) opts.c11 = c11;
    if (o_d11->count()) opts.d11 = d11;
    if (o_gamma->count()) opts.gamma = gamma;
    if (o_tol->count()) opts.tol = tol;
    if (o_out->count()) opts.out = out;
    if (o_seed->count()) opts.seed = seed;
    if (o_no_timing->count()) opts.timing = false;
  }
};

std::filesystem::path output_dir(const vvp::HarnessOptions& opts) {
  if (!opts.out.empty()) return opts.out;
  const char* env = std::getenv("VVP_OUT");
  return env && *env ? env : ".";
}

std::filesystem::path write_records(const vvp::HarnessOptions& opts, const char* kind,
                                    const std::vector<vvp::RunRecord>& records) {
  const std::filesystem::path dir = output_dir(opts);
  std::filesystem::create_directories(dir);
  const std::filesystem::path file = dir / (opts.problem + "_" + opts.scheme + "_" + kind + ".csv");
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  vvp::write_csv(out, records);
  return file;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace vvp;

  // config file first, so later flags override its values
  std::string config_path;
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config") {
      if (i + 1 == argc) {
        std::cerr << "--config needs a file path\n";
        return 2;
      }
      config_path = argv[++i];
    } else if (a.rfind("--config=", 0) == 0) {
      config_path = a.substr(9);
    } else {
      args.push_back(a);
    }
  }

  HarnessOptions opts;
  try {
    if (!config_path.empty())
      for (const auto& [key, value] : load_config(config_path)) apply_config(opts, key, value);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }

  CLI::App app{"velocity-vorticity-pressure optimal control experiments"};
  app.require_subcommand(1);
  CLI::App* conv = app.add_subcommand("convergence", "uniform refinement study with a rate table");
  CLI::App* adap = app.add_subcommand("adaptive", "estimator-driven refinement run");
  CLI::App* chck = app.add_subcommand("check", "report the coefficient assumption margins");
  CLI::App* grad = app.add_subcommand("gradcheck", "finite-difference check of the reduced gradient");
  CommonFlags flags[4];
  CLI::App* cmds[4] = {conv, adap, chck, grad};
  for (int i = 0; i < 4; ++i) flags[i].attach(cmds[i]);

  std::vector<char*> cargs;
  cargs.push_back(argv[0]);
  for (std::string& a : args) cargs.push_back(a.data());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    for (int i = 0; i < 4; ++i)
      if (cmds[i]->parsed()) flags[i].apply(opts);

    if (conv->parsed()) {
      const auto records = run_convergence(opts);
      const auto file = write_records(opts, "convergence", records);
      print_rate_table(std::cout, records);
      for (const auto& r : records)
        if (!r.converged)
          std::cout << "note: fixed point hit the iteration cap at level " << r.level << '\n';
      std::cout << "wrote " << file.string() << '\n';
    } else if (adap->parsed()) {
      const auto records = run_adaptive(opts);
      const auto file = write_records(opts, "adaptive", records);
      for (const auto& r : records) {
        char line[128];
        std::snprintf(line, sizeof line, "it %3d  dofs %7d  eta %.6g\n", r.level, r.dofs_total,
                      r.estimate.eta_total);
        std::cout << line;
      }
      std::cout << "wrote " << file.string() << '\n';
    } else if (chck->parsed()) {
      print_assumption_report(std::cout, detail::resolve(opts).prob);
    } else {
      const double mismatch = gradient_check_run(opts);
      char line[128];
      std::snprintf(line, sizeof line, "reduced gradient vs finite differences: %.3g relative\n",
                    mismatch);
      std::cout << line;
      if (mismatch > 1e-5) {
        std::cerr << "mismatch above 1e-5\n";
        return 1;
      }
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
