// coagss: self-similar coagulation profiles and their tail diagnostics.
//
// Subcommands:
//   solve    compute a profile by damped fixed-point iteration, write CSV
//   analyze  run the full diagnostic battery on a profile file
//   verify   run the constant-kernel oracle battery
//   sweep    solve a family of near-constant kernels and track the
//            perturbation norms
//
// Exit status: 0 success, 1 error, 2 completed with flags (non-convergence,
// degenerate profile, failed diagnostics).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "coagss/errors.hpp"
#include "coagss/io.hpp"
#include "coagss/quadrature.hpp"
#include "coagss/verify.hpp"

namespace {

struct KernelFlags {
  std::string kernel = "constant";
  double eps = 0.1;
  double alpha = 1.0 / 3.0;
};

coagss::KernelSpec kernel_from_flags(const KernelFlags& kf) {
  if (kf.kernel == "constant") return coagss::make_constant_kernel(2.0);
  if (kf.kernel == "brownian") return coagss::make_brownian_kernel();
  if (kf.kernel == "perturbed") return coagss::make_perturbed_kernel(kf.eps, kf.alpha);
  throw coagss::ConfigError("unknown kernel: " + kf.kernel);
}

void add_kernel_flags(CLI::App* cmd, KernelFlags& kf) {
  cmd->add_option("--kernel", kf.kernel, "kernel: constant|brownian|perturbed")
      ->check(CLI::IsMember({"constant", "brownian", "perturbed"}));
  cmd->add_option("--eps", kf.eps, "perturbation amplitude (perturbed kernel)");
  cmd->add_option("--alpha", kf.alpha, "singularity exponent (perturbed kernel)");
}

int run_solve(const KernelFlags& kf, double xmin, double xmax, int ppd, double tol,
              double damping, int max_iter, const std::string& out,
              const std::string& report_path) {
  const coagss::KernelSpec kernel = kernel_from_flags(kf);
  const coagss::Grid grid = coagss::build_grid(xmin, xmax, ppd);
  coagss::SolveOptions opts;
  opts.tol = tol;
  opts.damping = damping;
  opts.max_iter = max_iter;
  auto [profile, rep] = coagss::solve_selfsimilar(kernel, grid, opts);
  coagss::write_profile_csv(profile, out);
  coagss::write_text_file(
      report_path,
      coagss::solve_report_json(kernel, grid, opts, rep, profile.mass).dump(2) + "\n");
  std::cout << (rep.converged ? "converged" : "not converged") << " after " << rep.iterations
            << " iterations, final_update " << rep.final_update << ", residual_sup "
            << rep.residual_sup << "\n";
  return rep.converged ? 0 : 2;
}

int run_analyze(const KernelFlags& kf, const std::string& profile_path,
                const std::string& report_path) {
  const coagss::KernelSpec kernel = kernel_from_flags(kf);
  const coagss::Profile p = coagss::read_profile_csv(profile_path, kernel);
  coagss::AnalysisResult res = coagss::analyze_profile(p);
  res.report["flags"] = res.flags;
  coagss::write_text_file(report_path, res.report.dump(2) + "\n");
  for (const auto& f : res.flags) std::cout << "flag: " << f << "\n";
  std::cout << "report written to " << report_path << "\n";
  return res.flags.empty() ? 0 : 2;
}

int run_verify(int ppd) {
  const auto checks = coagss::run_verify_battery(ppd);
  int failed = 0;
  for (const auto& c : checks) {
    std::printf("%-34s %s  value=%.12g expected=%.12g tol=%.3g\n", c.name.c_str(),
                c.pass ? "PASS" : "FAIL", c.value, c.expected, c.tolerance);
    if (!c.pass) ++failed;
  }
  std::printf("%zu checks, %d failed\n", checks.size(), failed);
  return failed == 0 ? 0 : 1;
}

int run_sweep(const std::vector<double>& eps_list, double alpha, double xmin, double xmax,
              int ppd, double tol, double damping, int max_iter,
              const std::string& report_path) {
  for (double e : eps_list)
    if (!(e >= 0.0 && e <= 0.5)) throw coagss::ConfigError("sweep eps must be in [0, 0.5]");
  const coagss::Grid grid = coagss::build_grid(xmin, xmax, ppd);
  nlohmann::json rows = nlohmann::json::array();
  bool any_failed = false;
  std::printf("%-8s %-12s %-12s %-12s %-12s\n", "eps", "a_star", "nu_norm", "nu_norm/eps",
              "u_sup_dev");
  for (double e : eps_list) {
    nlohmann::json row;
    row["eps"] = e;
    try {
      const coagss::KernelSpec kernel = coagss::make_perturbed_kernel(e, alpha);
      coagss::SolveOptions opts;
      opts.tol = tol;
      opts.damping = damping;
      opts.max_iter = max_iter;
      auto [profile, rep] = coagss::solve_selfsimilar(kernel, grid, opts);
      if (!rep.converged) throw coagss::ConvergenceError("sweep solve did not converge",
                                                         rep.final_update, tol);
      const coagss::AstarFit fit = coagss::estimate_astar(profile);
      const double mu0 = coagss::mu_constant(kernel, fit.a_star);
      const coagss::SampledFunction u = coagss::prefactor_u(profile, fit.a_star);
      double dev = 0.0;
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double x = u.grid.nodes(i);
        if (x < fit.x_lo || x > fit.x_hi) continue;
        dev = std::max(dev, std::fabs(u.values(i) - mu0));
      }
      const double nu = coagss::perturbation_norm(u, mu0,
                                                  coagss::make_q_grid(1e-3, fit.a_star / 2.0));
      row["a_star"] = fit.a_star;
      row["nu_norm"] = nu;
      row["nu_norm_over_eps"] = e > 0.0 ? nu / e : 0.0;
      row["u_sup_dev"] = dev;
      row["converged"] = true;
      std::printf("%-8g %-12.6g %-12.6g %-12.6g %-12.6g\n", e, fit.a_star, nu,
                  e > 0.0 ? nu / e : 0.0, dev);
    } catch (const coagss::Error& err) {
      row["converged"] = false;
      row["error"] = err.what();
      any_failed = true;
      std::printf("%-8g solve failed: %s\n", e, err.what());
    }
    rows.push_back(row);
  }
  nlohmann::json doc;
  doc["schema"] = 1;
  doc["alpha"] = alpha;
  doc["grid"] = {{"x_min", xmin}, {"x_max", xmax}, {"points_per_decade", ppd}};
  doc["rows"] = rows;
  coagss::write_text_file(report_path, doc.dump(2) + "\n");
  return any_failed ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"self-similar coagulation profiles and tail diagnostics"};
  app.require_subcommand(1);

  KernelFlags kf;
  double xmin = 1e-4, xmax = 60.0;
  int ppd = 32;
  double tol = 1e-9, damping = 0.5;
  int max_iter = 200;
  std::string out = "profile.csv", report = "report.json", profile_path;
  std::string eps_csv = "0.01,0.05,0.1";

  CLI::App* solve = app.add_subcommand("solve", "compute a self-similar profile");
  add_kernel_flags(solve, kf);
  solve->add_option("--xmin", xmin);
  solve->add_option("--xmax", xmax);
  solve->add_option("--ppd", ppd, "grid points per decade");
  solve->add_option("--tol", tol);
  solve->add_option("--damping", damping);
  solve->add_option("--max-iter", max_iter);
  solve->add_option("--out", out, "profile CSV path");
  solve->add_option("--report", report, "solve report JSON path");

  CLI::App* analyze = app.add_subcommand("analyze", "diagnostic battery on a profile file");
  KernelFlags kfa;
  add_kernel_flags(analyze, kfa);
  analyze->add_option("--profile", profile_path, "profile CSV to analyze")->required();
  std::string areport = "analysis.json";
  analyze->add_option("--report", areport, "analysis JSON path");

  CLI::App* verify = app.add_subcommand("verify", "constant-kernel oracle battery");
  int vppd = 32;
  verify->add_option("--ppd", vppd, "grid points per decade");

  CLI::App* sweep = app.add_subcommand("sweep", "perturbed-kernel eps sweep");
  double salpha = 1.0 / 3.0;
  double sxmin = 1e-4, sxmax = 60.0;
  int sppd = 32;
  double stol = 1e-9, sdamping = 0.5;
  int smax_iter = 300;
  std::string sreport = "sweep.json";
  sweep->add_option("--eps", eps_csv, "comma-separated eps values");
  sweep->add_option("--alpha", salpha);
  sweep->add_option("--xmin", sxmin);
  sweep->add_option("--xmax", sxmax);
  sweep->add_option("--ppd", sppd);
  sweep->add_option("--tol", stol);
  sweep->add_option("--damping", sdamping);
  sweep->add_option("--max-iter", smax_iter);
  sweep->add_option("--report", sreport, "sweep report JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: config: " << e.what() << "\n";
    return 1;
  }

  try {
    if (solve->parsed()) return run_solve(kf, xmin, xmax, ppd, tol, damping, max_iter, out, report);
    if (analyze->parsed()) return run_analyze(kfa, profile_path, areport);
    if (verify->parsed()) return run_verify(vppd);
    if (sweep->parsed()) {
      std::vector<double> eps_list;
      std::string tok;
      std::istringstream ss(eps_csv);
      while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        eps_list.push_back(std::stod(tok));
      }
      if (eps_list.empty()) throw coagss::ConfigError("sweep needs at least one eps");
      return run_sweep(eps_list, salpha, sxmin, sxmax, sppd, stol, sdamping, smax_iter, sreport);
    }
  } catch (const coagss::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: unexpected: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
