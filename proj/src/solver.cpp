#include "coagss/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "coagss/errors.hpp"
#include "coagss/numerics.hpp"
#include "coagss/parallel.hpp"
#include "coagss/quadrature.hpp"

namespace coagss {

double profile_mass(const SampledFunction& f) {
  if (f.values.maxCoeff() == 0.0) return 0.0;
  return integrate(f, f.grid.front(), kInf, 1.0);
}

Profile make_profile(SampledFunction f, KernelSpec kernel, bool validate) {
  if (!f.tail_rate) f.tail_rate = fit_tail_rate(f);
  Profile p;
  p.f = std::move(f);
  p.kernel = kernel;
  p.mass = profile_mass(p.f);
  if (validate) {
    if (!(p.mass > 0.0) || !std::isfinite(p.mass))
      throw InvariantError("profile mass must be finite and positive");
    const Eigen::ArrayXd x2f = p.f.grid.nodes.square() * p.f.values;
    const double top = x2f.maxCoeff();
    if (!(x2f(0) <= 1e-3 * top))
      throw InvariantError("x_min^2 f(x_min) exceeds 1e-3 sup x^2 f (mass not resolved near 0)");
  }
  return p;
}

namespace {

// Outer integrand h(y) = y^{1+beta} f(y) G(x - y) on the node prefix
// [x_0 .. x_k]; integrated with the same cell reconstruction as everything
// else.
double piece_lower(const Eigen::ArrayXd& xs, const Eigen::ArrayXd& fv,
                   const TailCumulative& cum, double x, double beta) {
  const double xhalf = 0.5 * x;
  if (!(xhalf > xs(0))) return 0.0;
  const Eigen::Index n = xs.size();
  const double* begin = xs.data();
  Eigen::Index kA = std::clamp<Eigen::Index>(
      std::upper_bound(begin, begin + n, xhalf) - begin - 1, 0, n - 2);
  Eigen::Index kH = std::min<Eigen::Index>(kA + 1, n - 1);
  Eigen::ArrayXd h(kH + 1);
  for (Eigen::Index k = 0; k <= kH; ++k)
    h(k) = std::pow(xs(k), 1.0 + beta) * fv(k) * cum.eval(x - xs(k));
  const CellModel hm(xs.head(kH + 1), h);
  return hm.integrate(xs(0), std::min(xhalf, xs(kH)), 0.0, 0.0);
}

// Upper half in the w = x - y variable: phi(w) = (x-w)^{1+beta} f(x-w) G(w),
// w in (0, min(x/2, x - x_min)]. Below the first node G is constant (no mass
// under x_min), handled as a single direct Gauss segment.
double piece_upper(const Eigen::ArrayXd& xs, const CellModel& fmodel,
                   const BelowGridExtension& below, const TailCumulative& cum, double x,
                   double beta) {
  const double x0 = xs(0);
  const double wtop = std::min(0.5 * x, x - x0);
  if (!(wtop > 0.0)) return 0.0;
  const Eigen::Index n = xs.size();
  // stencil endpoints may reach below the grid; continue f by its power law
  auto f_at = [&](double y) {
    return y >= x0 ? fmodel.eval(std::min(y, xs(n - 1)))
                   : below.value0 * std::pow(y / below.x0, below.p);
  };
  double acc = 0.0;

  const double w1 = std::min(x0, wtop);
  if (w1 > 0.0) {
    const double g0 = cum.node_values()(0);
    if (g0 > 0.0) {
      double seg = 0.0;
      for (int g = 0; g < Gauss10::n; ++g) {
        const double w = w1 * Gauss10::nodes[g];
        const double y = std::min(x - w, xs(n - 1));
        seg += Gauss10::weights[g] * std::pow(y, 1.0 + beta) * fmodel.eval(y);
      }
      acc += g0 * seg * w1;
    }
  }
  if (wtop > x0) {
    const double* begin = xs.data();
    Eigen::Index kB = std::clamp<Eigen::Index>(
        std::upper_bound(begin, begin + n, wtop) - begin - 1, 0, n - 2);
    const Eigen::Index kP = std::min<Eigen::Index>(kB + 1, n - 1);
    Eigen::ArrayXd phi(kP + 1);
    for (Eigen::Index k = 0; k <= kP; ++k)
      phi(k) = std::pow(x - xs(k), 1.0 + beta) * f_at(x - xs(k)) * cum.node_values()(k);
    const CellModel pm(xs.head(kP + 1), phi);
    acc += pm.integrate(x0, std::min(wtop, xs(kP)), 0.0, 0.0);
  }
  return acc;
}

}  // namespace

namespace {

// Everything needed to evaluate T[f] at a point: kernel split, cell model of
// f, weighted tail cumulatives, below-grid extension.
struct CollisionContext {
  const Grid* grid;
  const Eigen::ArrayXd* values;
  std::vector<KernelTerm> terms;
  CellModel fmodel;
  BelowGridExtension below;
  std::vector<TailCumulative> cums;

  CollisionContext(const SampledFunction& f, const KernelSpec& kernel)
      : grid(&f.grid),
        values(&f.values),
        terms(separable_terms(kernel)),
        fmodel(f),
        below(BelowGridExtension::from(f)) {
    cums.reserve(terms.size());
    for (const auto& term : terms) cums.emplace_back(f, -term.beta);
  }

  double value_at(double x) const {
    double total = 0.0;
    for (std::size_t j = 0; j < terms.size(); ++j) {
      const double a = piece_lower(grid->nodes, *values, cums[j], x, terms[j].beta);
      const double b = piece_upper(grid->nodes, fmodel, below, cums[j], x, terms[j].beta);
      // mass below x_min enters through its power-law extension (guarded to
      // stay under 1e-6 of the total); without it the bottom node has no
      // fixed point.
      const double strip = cums[j].eval(x - 0.5 * grid->nodes(0)) *
                           below.integral_to_x0(0.0, 1.0 + terms[j].beta);
      total += terms[j].coef * (a + b + strip);
    }
    return total / (x * x);
  }
};

}  // namespace

SampledFunction apply_T(const Profile& p) {
  const SampledFunction& f = p.f;
  const Eigen::Index n = f.grid.size();
  if (!f.tail_rate && f.values.maxCoeff() > 0.0)
    throw ClosureMissingError("apply_T needs a fitted tail closure");

  const CollisionContext ctx(f, p.kernel);
  Eigen::ArrayXd out(n);
  parallel_for(n, [&](std::ptrdiff_t i) { out(i) = ctx.value_at(f.grid.nodes(i)); });

  SampledFunction result;
  result.grid = f.grid;
  result.values = std::move(out);
  result.tail_rate = fit_tail_rate(result);
  return result;
}

namespace {

// Log-log linear interpolation straight off a value array; the bottom block
// is power-law shaped, where this is exact.
double live_interp(const Eigen::ArrayXd& xs, const Eigen::ArrayXd& values, double y) {
  const Eigen::Index n = xs.size();
  y = std::clamp(y, xs(0), xs(n - 1));
  const double* begin = xs.data();
  Eigen::Index j = std::clamp<Eigen::Index>(std::upper_bound(begin, begin + n, y) - begin - 1,
                                            0, n - 2);
  const double v0 = values(j), v1 = values(j + 1);
  if (y == xs(j)) return v0;
  if (y == xs(j + 1)) return v1;
  if (v0 > 0.0 && v1 > 0.0) {
    const double th = std::log(y / xs(j)) / std::log(xs(j + 1) / xs(j));
    return std::exp(std::log(v0) + th * (std::log(v1) - std::log(v0)));
  }
  const double th = (y - xs(j)) / (xs(j + 1) - xs(j));
  return v0 + th * (v1 - v0);
}

// piece_upper against live values (used while marching the bottom block,
// where the cell-model snapshot would lag behind the march).
double piece_upper_live(const Eigen::ArrayXd& xs, const Eigen::ArrayXd& values,
                        const BelowGridExtension& below, const TailCumulative& cum, double x,
                        double beta) {
  const double x0 = xs(0);
  const double wtop = std::min(0.5 * x, x - x0);
  if (!(wtop > 0.0)) return 0.0;
  const Eigen::Index n = xs.size();
  double acc = 0.0;
  const double w1 = std::min(x0, wtop);
  if (w1 > 0.0) {
    const double g0 = cum.node_values()(0);
    if (g0 > 0.0) {
      double seg = 0.0;
      for (int g = 0; g < Gauss10::n; ++g) {
        const double w = w1 * Gauss10::nodes[g];
        const double y = std::min(x - w, xs(n - 1));
        seg += Gauss10::weights[g] * std::pow(y, 1.0 + beta) * live_interp(xs, values, y);
      }
      acc += g0 * seg * w1;
    }
  }
  if (wtop > x0) {
    const double* begin = xs.data();
    Eigen::Index kB = std::clamp<Eigen::Index>(
        std::upper_bound(begin, begin + n, wtop) - begin - 1, 0, n - 2);
    const Eigen::Index kP = std::min<Eigen::Index>(kB + 1, n - 1);
    Eigen::ArrayXd phi(kP + 1);
    for (Eigen::Index k = 0; k <= kP; ++k) {
      const double y = x - xs(k);
      const double fy = y >= x0 ? live_interp(xs, values, y)
                                : below.value0 * std::pow(y / below.x0, below.p);
      phi(k) = std::pow(y, 1.0 + beta) * fy * cum.node_values()(k);
    }
    const CellModel pm(xs.head(kP + 1), phi);
    acc += pm.integrate(x0, std::min(wtop, xs(kP)), 0.0, 0.0);
  }
  return acc;
}

}  // namespace

// Fill the bottom block [0, k_b) by marching the collision identity upward:
// each bottom value follows from the extension and the values below it
// (Volterra structure), so the eliminated equations hold by construction.
// The inner sweep reads live values (Gauss-Seidel); a second pass feeds the
// marched mass (~1e-8 of the total) back through the cumulatives.
void march_bottom(const Grid& grid, const KernelSpec& kernel, double tail_rate,
                  Eigen::Index k_b, Eigen::ArrayXd& values) {
  const Eigen::ArrayXd& xs = grid.nodes;
  values.head(k_b) = 0.0;
  const auto terms = separable_terms(kernel);
  for (int pass = 0; pass < 3; ++pass) {
    SampledFunction snapshot;
    snapshot.grid = grid;
    snapshot.values = values;
    snapshot.tail_rate = tail_rate;
    const BelowGridExtension below = BelowGridExtension::from(snapshot);
    std::vector<TailCumulative> cums;
    cums.reserve(terms.size());
    for (const auto& term : terms) cums.emplace_back(snapshot, -term.beta);
    for (Eigen::Index k = 0; k < k_b; ++k) {
      const double x = xs(k);
      for (int inner = 0; inner < 10; ++inner) {
        double total = 0.0;
        for (std::size_t j = 0; j < terms.size(); ++j) {
          const double strip = cums[j].eval(x - 0.5 * xs(0)) *
                               below.integral_to_x0(0.0, 1.0 + terms[j].beta);
          total += terms[j].coef * (strip +
                                    piece_lower(xs, values, cums[j], x, terms[j].beta) +
                                    piece_upper_live(xs, values, below, cums[j], x, terms[j].beta));
        }
        values(k) = total / (x * x);
      }
    }
  }
}

namespace {

// lambda f(lambda x) resampled onto the grid of f. Log-log linear inside the
// grid, power extrapolation below it, exponential closure above it.
Eigen::ArrayXd resample_scaled(const SampledFunction& f, double lambda) {
  const Eigen::ArrayXd& xs = f.grid.nodes;
  const Eigen::Index n = xs.size();
  Eigen::ArrayXd out(n);
  double p0 = 0.0;
  if (f.values(0) > 0.0 && f.values(1) > 0.0)
    p0 = std::log(f.values(1) / f.values(0)) / std::log(xs(1) / xs(0));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = lambda * xs(i);
    double v;
    if (xi < xs(0)) {
      v = f.values(0) > 0.0 ? f.values(0) * std::pow(xi / xs(0), p0) : 0.0;
    } else if (xi > xs(n - 1)) {
      const double rate = f.tail_rate.value_or(0.0);
      if (!(rate > 0.0) && f.values(n - 1) > 0.0)
        throw ClosureMissingError("renormalize needs a tail closure to scale upward");
      v = f.values(n - 1) * std::exp(-rate * (xi - xs(n - 1)));
    } else {
      v = interp(f, xi);
    }
    out(i) = lambda * v;
  }
  return out;
}

}  // namespace

Profile renormalize(const Profile& p) {
  const double m0 = profile_mass(p.f);
  if (!(m0 > 0.0) || !std::isfinite(m0))
    throw DegenerateProfileError("renormalize needs positive finite mass");
  if (std::fabs(m0 - 1.0) <= 1e-14) {
    Profile out = p;
    out.mass = m0;
    return out;
  }
  // lambda = mass(p) up to the resampling correction; a short fixed-point
  // refinement pins the discrete mass of the result to 1.
  double lambda = m0;
  SampledFunction g;
  double m = 0.0;
  for (int it = 0; it < 12; ++it) {
    g.grid = p.f.grid;
    g.values = resample_scaled(p.f, lambda);
    g.tail_rate = p.f.tail_rate ? std::optional<double>(*p.f.tail_rate * lambda) : std::nullopt;
    m = profile_mass(g);
    if (!(m > 0.0)) throw DegenerateProfileError("renormalize produced zero mass");
    if (std::fabs(m - 1.0) <= 1e-13) break;
    lambda *= m;
  }
  if (std::fabs(m - 1.0) > 1e-12)
    throw NumericalFailureError("renormalize failed to reach unit mass");
  Profile out;
  out.f = std::move(g);
  out.kernel = p.kernel;
  out.mass = m;
  return out;
}

std::pair<double, double> residual(const Profile& p) {
  const SampledFunction t = apply_T(p);
  const Eigen::ArrayXd& xs = p.f.grid.nodes;
  // The bottom block is a closure region (power-law continuation), like the
  // exponential closure past the last node; the defect is reported over the
  // resolved nodes.
  const Eigen::Index k_b = bottom_fit_window(p.f.grid).first;
  const Eigen::ArrayXd x2 = xs.square();
  const Eigen::ArrayXd num = (x2 * p.f.values - x2 * t.values).abs();
  const Eigen::ArrayXd den = x2 * p.f.values + 1e-300;
  const double sup = (num / den).tail(xs.size() - k_b).maxCoeff();
  // mass-weighted defect: int x |f - T[f]| dx by log-space trapezoid
  double l1 = 0.0;
  const Eigen::ArrayXd d = (p.f.values - t.values).abs() * x2;
  for (Eigen::Index i = k_b; i + 1 < xs.size(); ++i)
    l1 += 0.5 * (d(i) + d(i + 1)) * std::log(xs(i + 1) / xs(i));
  return {sup, l1};
}

std::pair<Profile, SolveReport> solve_selfsimilar(const KernelSpec& kernel, const Grid& grid,
                                                  const SolveOptions& opts) {
  if (!(opts.damping > 0.0 && opts.damping <= 1.0)) throw DomainError("damping must be in (0,1]");
  if (!(opts.tol > 0.0)) throw DomainError("tol must be positive");
  if (opts.max_iter < 0) throw DomainError("max_iter must be >= 0");
  if (grid.front() > 1e-4 * (1.0 + 1e-12) || grid.back() < 40.0 * (1.0 - 1e-12))
    throw DomainError("solver grid must span at least [1e-4, 40]");

  SampledFunction f;
  if (opts.init) {
    f.grid = grid;
    if (opts.init->grid.size() == grid.size() &&
        opts.init->grid.nodes.isApprox(grid.nodes)) {
      f.values = opts.init->values;
    } else {
      f.values.resize(grid.size());
      for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const double x = grid.nodes(i);
        if (x < opts.init->grid.front())
          f.values(i) = opts.init->values(0);
        else
          f.values(i) = interp(*opts.init, x);
      }
    }
    f.tail_rate = fit_tail_rate(f);
  } else {
    f.grid = grid;
    f.values = (-grid.nodes).exp();
    f.tail_rate = fit_tail_rate(f);
  }

  Profile state = renormalize(make_profile(std::move(f), kernel, false));

  // T is bilinear, so relative perturbations double through it and plain
  // damped substitution cannot contract (under-relaxation keeps every real
  // gain above 1 above 1). Solve the normalized fixed point
  //   F(s) = s - ln Phi(e^s) = 0,  Phi(g) = T[g] / mass(T[g]),
  // by matrix-free Newton-GMRES in log space. The unknowns are the nodes
  // above the bottom closure block; the block itself is the power-law
  // continuation of the window just above it (the same closure the
  // below-grid extension uses), which keeps the near-neutral bottom
  // directions out of the Jacobian. mass(T) at the root is the gauge m; the
  // exact family transform g(x) = m^{-2} f(x/m) then yields a solution of
  // the unscaled identity and the final renormalize pins mass = 1.
  SolveReport report;
  double m_gauge = 1.0;
  const Eigen::Index n = grid.size();
  const Eigen::Index k_b = bottom_fit_window(grid).first;
  const Eigen::Index nr = n - k_b;

  auto recon = [&](const Eigen::ArrayXd& s_red) -> Eigen::ArrayXd {
    Eigen::ArrayXd values(n);
    values.tail(nr) = s_red.exp();
    values.head(k_b) = 0.0;
    SampledFunction probe;
    probe.grid = grid;
    probe.values = values;
    const std::optional<double> rate = fit_tail_rate(probe);
    if (!rate) throw ClosureMissingError("iterate lost its exponential tail");
    march_bottom(grid, kernel, *rate, k_b, values);
    return values;
  };
  auto phi = [&](const Eigen::ArrayXd& s_red) -> Eigen::ArrayXd {
    SampledFunction cur;
    cur.grid = grid;
    cur.values = recon(s_red);
    cur.tail_rate = fit_tail_rate(cur);
    if (!cur.tail_rate) throw ClosureMissingError("iterate lost its exponential tail");
    Profile p;
    p.f = std::move(cur);
    p.kernel = kernel;
    SampledFunction ft = apply_T(p);
    for (Eigen::Index i = 0; i < ft.size(); ++i)
      if (!std::isfinite(ft.values(i)) || ft.values(i) < 0.0)
        throw NumericalFailureError("apply_T produced a NaN or negative value");
    const double m = profile_mass(ft);
    if (!(m > 0.0) || !std::isfinite(m))
      throw DegenerateProfileError("collision integral lost all mass");
    m_gauge = m;
    return (ft.values.tail(nr) / m).max(1e-300);
  };
  // The scaling family is only O(h^4)-invariant under the discrete
  // quadrature, so the map drifts along it and a plain fixed point does not
  // exist. Solve for a relative fixed point instead (freezing method):
  //   Phi(e^s) = e^{s + q v},   <s - s_init, v> = 0,
  // with the slide q as an extra unknown and v the frozen family tangent
  // 2 + x d(ln f)/dx of the initial state.
  const Eigen::ArrayXd s_init = state.f.values.tail(nr).max(1e-300).log();
  Eigen::ArrayXd v_ref(nr);
  {
    const Eigen::ArrayXd sl = state.f.values.max(1e-300).log();
    for (Eigen::Index i = 0; i < nr; ++i) {
      const Eigen::Index gi = k_b + i;
      const Eigen::Index lo = gi > 0 ? gi - 1 : gi;
      const Eigen::Index hi = gi + 1 < n ? gi + 1 : gi;
      v_ref(i) = 2.0 + grid.nodes(gi) * (sl(hi) - sl(lo)) / (grid.nodes(hi) - grid.nodes(lo));
    }
  }
  const double v_norm2 = (v_ref * v_ref).sum();

  // augmented unknowns z = [s; q]
  auto F_of = [&](const Eigen::ArrayXd& z) -> Eigen::ArrayXd {
    const Eigen::ArrayXd s_red = z.head(nr);
    const double q = z(nr);
    Eigen::ArrayXd out(nr + 1);
    out.head(nr) = s_red + q * v_ref - phi(s_red).log();
    out(nr) = ((s_red - s_init) * v_ref).sum() / v_norm2;
    return out;
  };

  Eigen::ArrayXd s(nr + 1);
  s.head(nr) = s_init;
  s(nr) = 0.0;
  Eigen::ArrayXd Fs = F_of(s);
  double fnorm = Fs.abs().maxCoeff();
  report.final_update = fnorm;

  for (int it = 0; it < opts.max_iter && fnorm > opts.tol; ++it) {
    const double fnorm2 = std::sqrt((Fs * Fs).sum());
    auto matvec = [&](const Eigen::ArrayXd& w) -> Eigen::ArrayXd {
      const double wn = w.abs().maxCoeff();
      if (wn == 0.0) return Eigen::ArrayXd::Zero(nr + 1);
      const double eps = 1e-7 * (1.0 + s.abs().maxCoeff()) / wn;
      return (F_of(s + eps * w) - Fs) / eps;
    };
    const int krylov = static_cast<int>(std::min<Eigen::Index>(35, nr + 1));
    std::vector<Eigen::ArrayXd> basis;
    basis.reserve(krylov + 1);
    basis.push_back(-Fs / fnorm2);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(krylov + 1, krylov);
    Eigen::VectorXd gvec = Eigen::VectorXd::Zero(krylov + 1);
    gvec(0) = fnorm2;
    std::vector<double> cs(krylov, 0.0), sn(krylov, 0.0);
    int steps = 0;
    for (int k = 0; k < krylov; ++k) {
      Eigen::ArrayXd v = matvec(basis[k]);
      for (int j = 0; j <= k; ++j) {
        H(j, k) = (v * basis[j]).sum();
        v -= H(j, k) * basis[j];
      }
      H(k + 1, k) = std::sqrt((v * v).sum());
      const bool breakdown = !(H(k + 1, k) > 1e-14 * fnorm2);
      if (!breakdown) basis.push_back(v / H(k + 1, k));
      for (int j = 0; j < k; ++j) {
        const double t = cs[j] * H(j, k) + sn[j] * H(j + 1, k);
        H(j + 1, k) = -sn[j] * H(j, k) + cs[j] * H(j + 1, k);
        H(j, k) = t;
      }
      const double denom = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = denom > 0.0 ? H(k, k) / denom : 1.0;
      sn[k] = denom > 0.0 ? H(k + 1, k) / denom : 0.0;
      H(k, k) = denom;
      H(k + 1, k) = 0.0;
      gvec(k + 1) = -sn[k] * gvec(k);
      gvec(k) = cs[k] * gvec(k);
      steps = k + 1;
      if (std::fabs(gvec(k + 1)) <= 1e-3 * fnorm2 || breakdown) break;
    }
    Eigen::VectorXd y = Eigen::VectorXd::Zero(steps);
    for (int i = steps - 1; i >= 0; --i) {
      double acc = gvec(i);
      for (int j = i + 1; j < steps; ++j) acc -= H(i, j) * y(j);
      y(i) = H(i, i) != 0.0 ? acc / H(i, i) : 0.0;
    }
    Eigen::ArrayXd dz = Eigen::ArrayXd::Zero(nr + 1);
    for (int i = 0; i < steps; ++i) dz += y(i) * basis[i];
    const double dzn = dz.abs().maxCoeff();
    if (dzn > 2.0) dz *= 2.0 / dzn;  // trust region in log space

    // backtracking; opts.damping scales the first trial step
    const double alpha0 = std::min(1.0, 2.0 * opts.damping);
    bool accepted = false;
    for (double alpha : {alpha0, 0.5 * alpha0, 0.25 * alpha0, 0.1 * alpha0}) {
      Eigen::ArrayXd s_try = s + alpha * dz;
      Eigen::ArrayXd F_try;
      try {
        F_try = F_of(s_try);
      } catch (const Error&) {
        continue;
      }
      const double fn = F_try.abs().maxCoeff();
      if (fn < fnorm * (1.0 - 0.05 * alpha) || fn <= opts.tol) {
        s = std::move(s_try);
        Fs = std::move(F_try);
        fnorm = fn;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // short substitution step to move off a bad spot
      Eigen::ArrayXd s_try = s - opts.damping * Fs;
      Fs = F_of(s_try);
      s = std::move(s_try);
      fnorm = Fs.abs().maxCoeff();
    }
    report.iterations = it + 1;
    report.final_update = fnorm;
    if (std::getenv("COAGSS_TRACE")) {
      Eigen::Index wi;
      Fs.abs().maxCoeff(&wi);
      std::fprintf(stderr, "newton %d: gmres=%d |dz|=%.2e |F|=%.3e comp=%td q=%.3e acc=%d\n",
                   it, steps, dzn, fnorm, static_cast<std::ptrdiff_t>(wi), s(nr),
                   static_cast<int>(accepted));
    }
  }
  report.converged = fnorm <= opts.tol;

  if (opts.max_iter > 0) {
    phi(s.head(nr));  // refresh m_gauge at the accepted iterate
    state.f.values = recon(s.head(nr));
    state.f.tail_rate = fit_tail_rate(state.f);
    // gauge map: fixed point of the m-scaled identity -> unscaled solution
    if (std::fabs(m_gauge - 1.0) > 1e-13) {
      SampledFunction g;
      g.grid = state.f.grid;
      g.values = resample_scaled(state.f, 1.0 / m_gauge) / m_gauge;
      g.tail_rate = state.f.tail_rate ? std::optional<double>(*state.f.tail_rate / m_gauge)
                                      : std::nullopt;
      state.f = std::move(g);
    }
    state = renormalize(state);
  }
  state.mass = profile_mass(state.f);
  auto [sup, l1] = residual(state);
  report.residual_sup = sup;
  report.residual_l1 = l1;
  return {std::move(state), report};
}

}  // namespace coagss
