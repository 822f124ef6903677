#include "coagss/tail_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coagss/errors.hpp"
#include "coagss/numerics.hpp"
#include "coagss/quadrature.hpp"

namespace coagss {

namespace {

// Sub-grid view [first, last] of a grid as its own Grid.
Grid subgrid(const Grid& g, Eigen::Index first, Eigen::Index last) {
  Grid out;
  out.points_per_decade = g.points_per_decade;
  out.ratio = g.ratio;
  out.nodes = g.nodes.segment(first, last - first + 1);
  out.x_min = out.nodes(0);
  out.x_max = out.nodes(out.nodes.size() - 1);
  return out;
}

Eigen::Index first_node_at_least(const Grid& g, double x) {
  const double* begin = g.nodes.data();
  return std::lower_bound(begin, begin + g.nodes.size(), x) - begin;
}

}  // namespace

SampledFunction slope_a(const Profile& p) {
  const Grid& g = p.f.grid;
  const Eigen::Index n = g.size();
  const Eigen::Index i0 = first_node_at_least(g, 1.0);
  if (i0 >= n) throw RangeError("slope_a needs nodes >= 1");
  Eigen::ArrayXd a(n - i0);
  for (Eigen::Index i = i0; i < n; ++i) {
    const double f = p.f.values(i);
    if (!(f > 0.0))
      throw PositivityError("f is nonpositive at a node in [1, x_max]", g.nodes(i));
    a(i - i0) = -std::log(f) / g.nodes(i);
  }
  SampledFunction out;
  out.grid = subgrid(g, i0, n - 1);
  out.values = std::move(a);
  return out;
}

AstarFit estimate_astar(const Profile& p) {
  const Grid& g = p.f.grid;
  if (g.back() < 40.0 * (1.0 - 1e-12)) throw DomainError("estimate_astar needs x_max >= 40");
  const double x_lo = g.back() / 4.0, x_hi = 3.0 * g.back() / 4.0;
  std::vector<double> xs, ys;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double x = g.nodes(i);
    if (x < x_lo || x > x_hi) continue;
    const double f = p.f.values(i);
    if (!(f > 0.0)) throw PositivityError("fit window contains nonpositive f", x);
    xs.push_back(x);
    ys.push_back(-std::log(f));
  }
  if (xs.size() < 4) throw RangeError("estimate_astar fit window has too few nodes");
  const LineFit fit = fit_line(Eigen::Map<Eigen::ArrayXd>(xs.data(), xs.size()),
                               Eigen::Map<Eigen::ArrayXd>(ys.data(), ys.size()));
  AstarFit out;
  out.a_star = fit.slope;
  out.x_lo = x_lo;
  out.x_hi = x_hi;
  out.r2 = fit.r2;
  out.trusted = fit.r2 >= 0.999;
  return out;
}

namespace {

double astar_on_window(const Profile& p, double x_lo, double x_hi) {
  const Grid& g = p.f.grid;
  std::vector<double> xs, ys;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double x = g.nodes(i);
    if (x < x_lo || x > x_hi) continue;
    const double f = p.f.values(i);
    if (!(f > 0.0)) throw PositivityError("fit window contains nonpositive f", x);
    xs.push_back(x);
    ys.push_back(-std::log(f));
  }
  if (xs.size() < 4) throw RangeError("a* fit window has too few nodes");
  return fit_line(Eigen::Map<Eigen::ArrayXd>(xs.data(), xs.size()),
                  Eigen::Map<Eigen::ArrayXd>(ys.data(), ys.size()))
      .slope;
}

}  // namespace

double astar_window_stability(const Profile& p, double frac) {
  const double xm = p.f.grid.back();
  const double base = astar_on_window(p, xm / 4.0, 3.0 * xm / 4.0);
  double worst = 0.0;
  for (double sign : {-1.0, 1.0}) {
    const double shift = sign * frac * xm;
    const double lo = std::max(p.f.grid.front(), xm / 4.0 + shift);
    const double hi = std::min(xm, 3.0 * xm / 4.0 + shift);
    const double a = astar_on_window(p, lo, hi);
    worst = std::max(worst, std::fabs(a - base) / std::fabs(base));
  }
  return worst;
}

SandwichBounds fit_exponential_bounds(const Profile& p, double a_star) {
  if (!(a_star > 0.0)) throw DomainError("fit_exponential_bounds needs a_star > 0");
  const Grid& g = p.f.grid;
  const double x_hi = 3.0 * g.back() / 4.0;
  const Eigen::Index i0 = first_node_at_least(g, 1.0);
  const Eigen::Index i1 = first_node_at_least(g, x_hi * (1.0 + 1e-12));
  if (i0 >= g.size() || i1 <= i0) throw RangeError("sandwich range [1, x_hi] is empty");
  for (double delta : {0.01, 0.02, 0.05, 0.1, 0.2}) {
    const double a1 = a_star * (1.0 + delta);
    const double a2 = a_star * (1.0 - delta);
    double log_c1 = std::numeric_limits<double>::infinity();
    double log_c2 = -std::numeric_limits<double>::infinity();
    bool ok = true;
    for (Eigen::Index i = i0; i < std::min<Eigen::Index>(i1 + 1, g.size()); ++i) {
      const double f = p.f.values(i);
      if (!(f > 0.0)) {
        ok = false;
        break;
      }
      const double lf = std::log(f);
      log_c1 = std::min(log_c1, lf + a1 * g.nodes(i));
      log_c2 = std::max(log_c2, lf + a2 * g.nodes(i));
    }
    if (!ok || !std::isfinite(log_c1) || !std::isfinite(log_c2)) continue;
    SandwichBounds b;
    b.C1 = std::exp(log_c1);
    b.alpha1 = a1;
    b.C2 = std::exp(log_c2);
    b.alpha2 = a2;
    b.delta = delta;
    b.x_lo = g.nodes(i0);
    b.x_hi = g.nodes(std::min<Eigen::Index>(i1, g.size() - 1));
    if (!(b.C1 > 0.0) || !std::isfinite(b.C2)) continue;
    return b;
  }
  throw TailNotExponentialError("no delta <= 0.2 gives positive finite sandwich constants");
}

bool sandwich_holds(const Profile& p, const SandwichBounds& b) {
  const Grid& g = p.f.grid;
  const double lc1 = std::log(b.C1), lc2 = std::log(b.C2);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double x = g.nodes(i);
    if (x < b.x_lo || x > b.x_hi) continue;
    const double f = p.f.values(i);
    if (!(f > 0.0)) return false;
    const double lf = std::log(f);
    if (lf < lc1 - b.alpha1 * x - 1e-12) return false;
    if (lf > lc2 - b.alpha2 * x + 1e-12) return false;
  }
  return true;
}

double doubling_check(const Profile& p, double C) {
  const SampledFunction a = slope_a(p);
  const Grid& g = a.grid;
  const double x_max = g.back();
  double margin = std::numeric_limits<double>::infinity();
  int tested = 0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double x = g.nodes(i);
    const double X = 2.0 * x - 2.0;
    if (X < g.front() || X > x_max) continue;
    const double aX = interp(a, X);
    const double bound = std::log(C * (X + 1.0)) / X;
    margin = std::min(margin, bound - (aX - a.values(i)));
    ++tested;
  }
  if (tested == 0) throw RangeError("doubling_check: no x with 2x-2 inside the grid");
  return margin;
}

SampledFunction flatness_profile(const Profile& p, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("flatness delta must be in (0,1)");
  const SampledFunction a = slope_a(p);
  const Grid& g = a.grid;
  const Eigen::Index i0 = first_node_at_least(g, g.front() / delta);
  if (i0 >= g.size()) throw RangeError("flatness_profile: delta x < 1 for every node");
  Eigen::ArrayXd m(g.size() - i0);
  for (Eigen::Index i = i0; i < g.size(); ++i) {
    const double lo = delta * g.nodes(i);
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j <= i; ++j) {
      if (g.nodes(j) < lo * (1.0 - 1e-12)) continue;
      best = std::max(best, a.values(j));
    }
    m(i - i0) = best;
  }
  SampledFunction out;
  out.grid = subgrid(g, i0, g.size() - 1);
  out.values = std::move(m);
  return out;
}

SampledFunction prefactor_u(const Profile& p, double a_star) {
  if (!(a_star > 0.0)) throw DomainError("prefactor_u needs a_star > 0");
  const Grid& g = p.f.grid;
  Eigen::ArrayXd u(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double f = p.f.values(i);
    u(i) = f > 0.0 ? std::exp(std::log(f) + a_star * g.nodes(i)) : 0.0;
  }
  SampledFunction out;
  out.grid = g;
  out.values = std::move(u);
  out.tail_rate = fit_tail_rate(out).value_or(0.0);
  return out;
}

std::vector<std::pair<double, double>> prefactor_averages(const SampledFunction& u, double A,
                                                          const std::vector<double>& R_list) {
  if (!(A >= 1.0)) throw DomainError("prefactor_averages needs A >= 1");
  std::vector<std::pair<double, double>> out;
  out.reserve(R_list.size());
  for (double R : R_list) {
    if (!(R > 1.0 / A)) throw DomainError("prefactor_averages needs A*R > 1");
    if (A * R > u.grid.back() * (1.0 + 1e-12))
      throw RangeError("prefactor_averages: A*R beyond the grid");
    out.emplace_back(R, integrate(u, 1.0, std::min(A * R, u.grid.back()), 0.0) / R);
  }
  return out;
}

double mu_constant(const KernelSpec& kernel, double a_star) {
  return 2.0 * a_star / boundary_integral(kernel, 1e-10);
}

namespace {

// mu extended below its grid by the first node value (bounded near 0).
double mu_value(const SampledFunction& mu, double y) {
  if (y <= mu.grid.front()) return mu.values(0);
  if (y >= mu.grid.back()) return mu.values(mu.size() - 1);
  return interp(mu, y);
}

}  // namespace

double mu_residual(const SampledFunction& mu, const KernelSpec& kernel, double a_star,
                   const std::vector<double>& test_points) {
  if (!(a_star > 0.0)) throw DomainError("mu_residual needs a_star > 0");
  double sup = 0.0;
  const int ppd_sub = 32;
  const double ratio = std::pow(10.0, 1.0 / ppd_sub);
  for (double x : test_points) {
    if (!(x > 0.0)) throw DomainError("mu_residual test point must be positive");
    // conv = int_0^x K(y, x-y) mu(y) mu(x-y) dy = 2 int_0^{x/2} (symmetry)
    const double top = 0.5 * x;
    const double cut = x * 1e-12;
    double conv = 0.0;
    double phi_lo = 0.0, s_lo = 0.0, phi_next = 0.0;
    const int cells = static_cast<int>(std::ceil(std::log(top / cut) / std::log(ratio)));
    for (int c = cells - 1; c >= 0; --c) {
      const double hi = top * std::pow(ratio, -static_cast<double>(c));
      const double lo = std::max(cut, hi / ratio);
      const double t0 = std::log(lo), t1 = std::log(hi);
      double cell = 0.0;
      for (int g = 0; g < Gauss10::n; ++g) {
        const double y = std::exp(t0 + (t1 - t0) * Gauss10::nodes[g]);
        cell += Gauss10::weights[g] * eval(kernel, y, x - y) * mu_value(mu, y) *
                mu_value(mu, x - y) * y;
      }
      conv += cell * (t1 - t0);
      if (c == cells - 1) {
        s_lo = lo;
        phi_lo = eval(kernel, lo, x - lo) * mu_value(mu, lo) * mu_value(mu, x - lo);
        const double l2 = lo * ratio;
        phi_next = eval(kernel, l2, x - l2) * mu_value(mu, l2) * mu_value(mu, x - l2);
      }
    }
    // power-law completion of the (0, cut] sliver
    if (phi_lo > 0.0) {
      double a_loc = phi_next > 0.0 ? -std::log(phi_next / phi_lo) / std::log(ratio) : 0.0;
      a_loc = std::clamp(a_loc, -0.5, 0.999);
      conv += phi_lo * s_lo / (1.0 - a_loc);
    }
    conv *= 2.0;
    const double lhs = x * mu_value(mu, x);
    const double rhs = conv / (2.0 * a_star);
    sup = std::max(sup, std::fabs(lhs - rhs) / (lhs + 1e-300));
  }
  return sup;
}

MomentReport moments(const Profile& p, const std::vector<double>& gammas,
                     double neg_moment_gamma) {
  if (!(neg_moment_gamma >= 0.0 && neg_moment_gamma < 1.0))
    throw DomainError("negative-moment gamma must be in [0,1)");
  MomentReport rep;
  rep.gammas = gammas;
  rep.M_values.reserve(gammas.size());
  double a_fit = -std::numeric_limits<double>::infinity();
  for (double g : gammas) {
    if (!(g >= 1.0)) throw DomainError("moment exponents must be >= 1");
    const double m = integrate(p.f, p.f.grid.front(), kInf, g);
    rep.M_values.push_back(m);
    a_fit = std::max(a_fit, (std::log(m) - g * std::log(g)) / g);
  }
  rep.A_fit = a_fit;
  rep.neg_moment_gamma = neg_moment_gamma;
  rep.neg_moment = integrate(p.f, p.f.grid.front(), kInf, 1.0 - neg_moment_gamma);
  // dyadic averages at the decade marks inside the grid
  rep.dyadic_sup = 0.0;
  for (double R = p.f.grid.front() * 2.0; R <= p.f.grid.back(); R *= 10.0) {
    const double avg = integrate(p.f, R / 2.0, R, 1.0) / R;
    rep.dyadic_sup = std::max(rep.dyadic_sup, avg);
  }
  return rep;
}

double tv_of_samples(const SampledFunction& g, double a, double b) {
  if (!(a >= g.grid.front() && b <= g.grid.back() && a < b))
    throw RangeError("tv_of_samples needs [a,b] inside the grid");
  const double fa = interp(g, a), fb = interp(g, b);
  double tv = 0.0;
  double prev = fa;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double x = g.grid.nodes(i);
    if (x <= a || x >= b) continue;
    tv += std::fabs(g.values(i) - prev);
    prev = g.values(i);
  }
  tv += std::fabs(fb - prev);
  return tv;
}

std::vector<double> total_variation(const Profile& p, double a, double b,
                                    const std::vector<int>& refinement_levels) {
  if (!(a > p.f.grid.front() && b < p.f.grid.back() && a < b))
    throw RangeError("total_variation needs [a,b] strictly inside the grid");
  std::vector<double> out;
  out.reserve(refinement_levels.size());
  for (int ppd : refinement_levels) {
    if (ppd == p.f.grid.points_per_decade) {
      out.push_back(tv_of_samples(p.f, a, b));
      continue;
    }
    const Grid g = build_grid(p.f.grid.x_min, p.f.grid.x_max, ppd);
    SolveOptions opts;
    opts.tol = 1e-10;
    opts.max_iter = 400;
    auto [prof, rep] = solve_selfsimilar(p.kernel, g, opts);
    out.push_back(tv_of_samples(prof.f, a, b));
  }
  return out;
}

PositivityScan positivity_radius(const Profile& p) {
  const Grid& g = p.f.grid;
  PositivityScan out;
  Eigen::Index i = g.size() - 1;
  if (!(p.f.values(i) > 0.0)) {
    out.x_tilde = g.back();
    out.degenerate = true;
    return out;
  }
  while (i > 0 && p.f.values(i - 1) > 0.0) --i;
  out.x_tilde = g.nodes(i);
  out.degenerate = false;
  return out;
}

}  // namespace coagss
