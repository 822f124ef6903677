#include "coagss/verify.hpp"

#include <cmath>
#include <numbers>

#include "coagss/laplace.hpp"
#include "coagss/numerics.hpp"
#include "coagss/quadrature.hpp"
#include "coagss/solver.hpp"
#include "coagss/tail_analysis.hpp"

namespace coagss {

namespace {

struct Battery {
  std::vector<VerifyCheck> checks;
  double quad_scale;  // tolerance multiplier, (32/ppd)^4 floored at 1

  void add(const std::string& name, double value, double expected, double tol,
           bool scale_with_grid = false) {
    VerifyCheck c;
    c.name = name;
    c.value = value;
    c.expected = expected;
    c.tolerance = scale_with_grid ? tol * quad_scale : tol;
    const double denom = std::max(std::fabs(expected), 1.0);
    c.pass = std::isfinite(value) && std::fabs(value - expected) <= c.tolerance * denom;
    checks.push_back(c);
  }
};

}  // namespace

std::vector<VerifyCheck> run_verify_battery(int ppd) {
  Battery b;
  b.quad_scale = ppd >= 32 ? 1.0 : std::pow(32.0 / ppd, 4);

  const KernelSpec kc = make_constant_kernel(2.0);
  const KernelSpec kb = make_brownian_kernel();

  // kernel evaluations: closed forms
  b.add("kernel.constant.eval", eval(kc, 3.7, 0.2), 2.0, 1e-15);
  b.add("kernel.brownian.diagonal", eval(kb, 5.0, 5.0), 4.0, 1e-15);
  b.add("kernel.brownian.eval_1_8", eval(kb, 1.0, 8.0), 4.5, 1e-14);
  b.add("kernel.brownian.homogeneity", eval(kb, 2.0, 16.0) - eval(kb, 1.0, 8.0), 0.0, 1e-13);

  // boundary integrals: constant and the Beta closed form
  b.add("kernel.boundary.constant", boundary_integral(kc, 1e-10), 2.0, 1e-12);
  const double beta_closed = 2.0 + 2.0 * beta_function(4.0 / 3.0, 2.0 / 3.0);
  b.add("kernel.boundary.brownian", boundary_integral(kb, 1e-10), beta_closed, 1e-9);
  b.add("kernel.boundary.perturbed_eps0",
        boundary_integral(make_perturbed_kernel(0.0, 1.0 / 3.0), 1e-10), 2.0, 1e-12);

  // sampled audit of the stored constants
  const KernelBoundsReport kbr = verify_bounds(kb, 20000, 42);
  b.add("kernel.bounds.brownian_K0", kbr.K0_fit <= 2.0 + 1e-12 ? 2.0 : kbr.K0_fit, 2.0, 1e-12);
  b.add("kernel.bounds.brownian_k0", kbr.k0_fit, 4.0, 1e-12);

  // quadrature oracles on the exponential
  const Grid g = build_grid(1e-4, 60.0, ppd);
  SampledFunction ef;
  ef.grid = g;
  ef.values = (-g.nodes).exp();
  ef.tail_rate = fit_tail_rate(ef);
  b.add("integrate.gamma2", integrate(ef, g.front(), kInf, 1.0), 1.0, 1e-6, true);
  b.add("integrate.box", [] {
    const Grid gb = build_grid(1.0, 2.0, 64);
    SampledFunction one;
    one.grid = gb;
    one.values = Eigen::ArrayXd::Ones(gb.size());
    return integrate(one, 1.0, 2.0, 0.0);
  }(), 1.0, 1e-13);
  b.add("integrate.exp_segment", integrate(ef, 1.0, 2.0, 0.0),
        std::exp(-1.0) - std::exp(-2.0), 1e-8, true);
  {
    const SampledFunction cum = tail_cumulative(ef, 0.0);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < cum.size(); ++i) {
      if (g.nodes(i) > 30.0) break;
      worst = std::max(worst,
                       std::fabs(cum.values(i) - std::exp(-g.nodes(i))) / std::exp(-g.nodes(i)));
    }
    b.add("tail_cumulative.exp", worst, 0.0, 1e-6, true);
  }

  // the collision operator fixes e^{-x} for the constant kernel
  {
    const Profile pe = make_profile(ef, kc);
    const SampledFunction t = apply_T(pe);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < t.size(); ++i)
      worst = std::max(worst, std::fabs(t.values(i) - ef.values(i)) / ef.values(i));
    b.add("apply_T.constant_fixed_point", worst, 0.0, 2e-4, true);

    auto [sup, l1] = residual(pe);
    b.add("residual.constant_oracle", sup, 0.0, 2e-4, true);
  }

  // renormalize: f = 2 e^{-x} has mass 2, goes to 4 e^{-2x}
  {
    SampledFunction f2;
    f2.grid = g;
    f2.values = 2.0 * (-g.nodes).exp();
    f2.tail_rate = fit_tail_rate(f2);
    const Profile r = renormalize(make_profile(f2, kc, false));
    b.add("renormalize.mass", r.mass, 1.0, 1e-12);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const double x = g.nodes(i);
      if (x > 10.0) break;
      const double want = 4.0 * std::exp(-2.0 * x);
      worst = std::max(worst, std::fabs(r.f.values(i) - want) / want);
    }
    b.add("renormalize.shape", worst, 0.0, 5e-2);
  }

  // solve: constant kernel from the exact initial guess
  {
    SolveOptions opts;
    opts.damping = 1.0;
    opts.tol = 1e-7;
    opts.max_iter = 20;
    auto [prof, rep] = solve_selfsimilar(kc, g, opts);
    b.add("solve.constant.converged", rep.converged ? 1.0 : 0.0, 1.0, 0.0);
    b.add("solve.constant.mass", prof.mass, 1.0, 1e-11);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const double x = g.nodes(i);
      if (x < 0.01 || x > 30.0) continue;
      worst = std::max(worst, std::fabs(prof.f.values(i) - std::exp(-x)) / std::exp(-x));
    }
    b.add("solve.constant.profile_error", worst, 0.0, 1e-3, true);

    const AstarFit fit = estimate_astar(prof);
    b.add("astar.constant", fit.a_star, 1.0, 1e-2);
    b.add("astar.constant.r2", fit.r2, 1.0, 1e-4);
    b.add("mu0.constant", mu_constant(kc, 1.0), 1.0, 1e-12);

    const SampledFunction u = prefactor_u(prof, fit.a_star);
    double dev = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const double x = u.grid.nodes(i);
      if (x < fit.x_lo || x > fit.x_hi) continue;
      dev = std::max(dev, std::fabs(u.values(i) - 1.0));
    }
    b.add("prefactor.constant_dev", dev, 0.0, 1e-2);
  }

  // synthetic prefactor oracles: u == 1
  {
    SampledFunction one;
    one.grid = g;
    one.values = Eigen::ArrayXd::Ones(g.size());
    one.tail_rate = 0.0;
    const auto avg = prefactor_averages(one, 2.0, {10.0});
    b.add("averages.flat", avg[0].second, 1.9, 1e-10);
    const auto U = transform_U(one, {1.0});
    b.add("transform_U.flat", U[0], std::exp(-1.0), 1e-10);
    b.add("perturbation_norm.flat", perturbation_norm(one, 1.0, make_q_grid(1e-3, 0.5)), 0.0,
          1e-10);
  }

  // moment oracles on the sampled exponential (fine dedicated grid)
  {
    const Grid gm = build_grid(1e-6, 80.0, std::max(64, ppd));
    SampledFunction fm;
    fm.grid = gm;
    fm.values = (-gm.nodes).exp();
    fm.tail_rate = fit_tail_rate(fm);
    Profile pm;
    pm.f = fm;
    pm.kernel = kc;
    pm.mass = 1.0;
    const MomentReport mr = moments(pm, {1.0, 2.0, 3.0, 5.0, 10.0});
    b.add("moments.M1", mr.M_values[0], 1.0, 1e-6);
    b.add("moments.M5", mr.M_values[3], 120.0, 1e-6);
    b.add("moments.M10", mr.M_values[4], 3628800.0, 1e-6);
    b.add("moments.A_fit", mr.A_fit, 0.0, 1e-6);
    b.add("moments.negative", mr.neg_moment, std::sqrt(std::numbers::pi) / 2.0, 1e-6);
    const double dy = integrate(pm.f, 1.0, 2.0, 1.0) / 2.0;
    b.add("moments.dyadic_R2", dy, 0.5 * (2.0 * std::exp(-1.0) - 3.0 * std::exp(-2.0)), 1e-6);
  }

  // limiting-equation residual at the constant solution
  {
    const Grid mg = build_grid(1e-4, 24.0, 16);
    SampledFunction mu;
    mu.grid = mg;
    mu.values = Eigen::ArrayXd::Ones(mg.size());
    mu.tail_rate = 0.0;
    b.add("mu_residual.constant", mu_residual(mu, kc, 1.0, {1.0, 3.7, 10.0}), 0.0, 1e-8);
    SampledFunction mu2 = mu;
    mu2.values *= 2.0;
    b.add("mu_residual.doubled", mu_residual(mu2, kc, 1.0, {1.0, 3.7, 10.0}), 1.0, 1e-8);
  }

  return b.checks;
}

}  // namespace coagss
