#include "coagss/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coagss/errors.hpp"
#include "coagss/numerics.hpp"

namespace coagss {

std::string KernelSpec::name() const {
  switch (variant) {
    case KernelVariant::Constant: return "constant";
    case KernelVariant::BrownianHomog: return "brownian";
    case KernelVariant::PerturbedConstant: return "perturbed";
  }
  return "unknown";
}

KernelSpec make_constant_kernel(double c) {
  if (!(c > 0.0)) throw DomainError("constant kernel needs c > 0");
  KernelSpec k;
  k.variant = KernelVariant::Constant;
  k.c = c;
  k.alpha = 0.0;
  k.K0 = c / 2.0;  // K <= K0 * 2 with alpha = 0
  k.k0 = c;
  k.kappa = 1.0;
  k.deriv_bound = 0.0;
  return k;
}

KernelSpec make_brownian_kernel() {
  KernelSpec k;
  k.variant = KernelVariant::BrownianHomog;
  k.alpha = 1.0 / 3.0;
  // (2 + S)/S with S = s^a + s^-a >= 2 peaks at S = 2.
  k.K0 = 2.0;
  k.k0 = 4.0;
  k.kappa = 1.0;
  k.deriv_bound = 1.0 / 3.0;
  return k;
}

KernelSpec make_perturbed_kernel(double eps, double alpha) {
  if (!(eps >= 0.0 && eps < 1.0)) throw DomainError("perturbed kernel needs eps in [0,1)");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("perturbed kernel needs alpha in [0,1)");
  KernelSpec k;
  k.variant = KernelVariant::PerturbedConstant;
  k.eps = eps;
  k.alpha = alpha;
  k.K0 = 1.0;
  k.k0 = 2.0;
  k.kappa = 1.0;
  k.deriv_bound = eps * alpha;
  return k;
}

double eval(const KernelSpec& kernel, double x, double y) {
  if (!(x > 0.0) || !(y > 0.0)) throw DomainError("kernel eval needs x, y > 0");
  // s = max/min makes symmetry exact in floating point.
  const double s = x >= y ? x / y : y / x;
  switch (kernel.variant) {
    case KernelVariant::Constant:
      return kernel.c;
    case KernelVariant::BrownianHomog: {
      const double r = std::cbrt(s);
      return 2.0 + r + 1.0 / r;
    }
    case KernelVariant::PerturbedConstant: {
      if (kernel.eps == 0.0 || kernel.alpha == 0.0) return 2.0;
      const double r = std::pow(s, kernel.alpha);
      return 2.0 + kernel.eps * (r + 1.0 / r - 2.0);
    }
  }
  throw DomainError("unknown kernel variant");
}

std::vector<KernelTerm> separable_terms(const KernelSpec& kernel) {
  switch (kernel.variant) {
    case KernelVariant::Constant:
      return {{kernel.c, 0.0}};
    case KernelVariant::BrownianHomog:
      return {{2.0, 0.0}, {1.0, 1.0 / 3.0}, {1.0, -1.0 / 3.0}};
    case KernelVariant::PerturbedConstant: {
      if (kernel.eps == 0.0 || kernel.alpha == 0.0) return {{2.0, 0.0}};
      return {{2.0 - 2.0 * kernel.eps, 0.0}, {kernel.eps, kernel.alpha}, {kernel.eps, -kernel.alpha}};
    }
  }
  throw DomainError("unknown kernel variant");
}

namespace {

// xorshift-based uniform in [0,1); avoids distribution implementation drift.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

double envelope(double alpha, double x, double y) {
  if (alpha == 0.0) return 2.0;
  const double s = x >= y ? x / y : y / x;
  const double r = std::pow(s, alpha);
  return r + 1.0 / r;
}

}  // namespace

KernelBoundsReport verify_bounds(const KernelSpec& kernel, std::int64_t sample_count,
                                 std::uint64_t seed) {
  if (sample_count < 100) throw DomainError("verify_bounds needs sample_count >= 100");
  SplitMix64 rng(seed);
  const double lo = std::log(1e-8), hi = std::log(1e8);
  auto draw = [&] { return std::exp(lo + (hi - lo) * rng.uniform()); };

  KernelBoundsReport rep;
  rep.alpha_used = kernel.alpha;
  rep.kappa = kernel.kappa;
  rep.samples = sample_count;
  double k0_min = std::numeric_limits<double>::infinity();
  double K0_max = 0.0;
  double deriv_max = 0.0;

  // The diagonal attains the band minimum and the envelope supremum for all
  // supported variants; seed it so the fits are exact, not just close.
  {
    const double x = 1.0;
    const double v = eval(kernel, x, x);
    k0_min = std::min(k0_min, v);
    K0_max = std::max(K0_max, v / envelope(kernel.alpha, x, x));
  }

  const double band = kernel.kappa;
  for (std::int64_t i = 0; i < sample_count; ++i) {
    const double x = draw();
    const double y = draw();
    const double v = eval(kernel, x, y);
    K0_max = std::max(K0_max, v / envelope(kernel.alpha, x, y));

    // band sample: y' log-uniform inside |x - y'| <= kappa (x + y')
    const double rlo = std::max(1e-8, x * (1.0 - band) / (1.0 + band));
    const double rhi = std::min(1e8, band >= 1.0 ? 1e8 : x * (1.0 + band) / (1.0 - band));
    const double yb = rlo * std::exp(std::log(rhi / rlo) * rng.uniform());
    k0_min = std::min(k0_min, eval(kernel, x, yb));

    // centered difference for the derivative constant
    const double dx = 1e-6 * x;
    const double d = (eval(kernel, x + dx, y) - eval(kernel, x - dx, y)) / (2.0 * dx);
    deriv_max = std::max(deriv_max, std::fabs(d) * x / envelope(kernel.alpha, x, y));
  }

  rep.K0_fit = K0_max;
  rep.k0_fit = k0_min;
  rep.derivative_bound_fit = deriv_max;
  return rep;
}

double boundary_integral(const KernelSpec& kernel, double tol) {
  if (!(tol > 0.0 && tol <= 1e-3)) throw DomainError("boundary_integral tol must be in (0, 1e-3]");

  // I = 2 int_0^{1/2} K(s, 1-s) ds by symmetry; geometric grading toward 0
  // handles the s^{-alpha} endpoint, the last sliver is completed by a local
  // power-law model.
  auto integrate_half = [&](int ppd) {
    const double s_top = 0.5;
    const double s_cut = 1e-14;
    const double ratio = std::pow(10.0, 1.0 / ppd);
    const int cells = static_cast<int>(std::ceil(std::log(s_top / s_cut) / std::log(ratio)));
    double sum = 0.0;
    double phi_lo = 0.0, s_lo_last = 0.0, phi_next = 0.0;
    for (int c = cells - 1; c >= 0; --c) {  // ascending in s
      const double s_hi = s_top * std::pow(ratio, -static_cast<double>(c));
      const double s_lo = std::max(s_cut, s_hi / ratio);
      const double t_lo = std::log(s_lo), t_hi = std::log(s_hi);
      double cell = 0.0;
      for (int g = 0; g < Gauss10::n; ++g) {
        const double t = t_lo + (t_hi - t_lo) * Gauss10::nodes[g];
        const double s = std::exp(t);
        cell += Gauss10::weights[g] * eval(kernel, s, 1.0 - s) * s;
      }
      sum += cell * (t_hi - t_lo);
      if (c == cells - 1) {
        phi_lo = eval(kernel, s_lo, 1.0 - s_lo);
        s_lo_last = s_lo;
        phi_next = eval(kernel, s_lo * ratio, 1.0 - s_lo * ratio);
      }
    }
    // local power fit phi ~ A s^{-a} near the cutoff, integrate (0, s_lo_last]
    double a_loc = 0.0;
    if (phi_lo > 0.0 && phi_next > 0.0)
      a_loc = -std::log(phi_next / phi_lo) / std::log(ratio);
    a_loc = std::clamp(a_loc, -0.5, 0.999);
    sum += phi_lo * s_lo_last / (1.0 - a_loc);
    return 2.0 * sum;
  };

  double prev = integrate_half(16);
  for (int ppd : {32, 64, 128, 256}) {
    const double cur = integrate_half(ppd);
    const double err = std::fabs(cur - prev) / std::max(std::fabs(cur), 1e-300);
    if (err <= tol) return cur;
    prev = cur;
  }
  throw ConvergenceError("boundary_integral did not reach tolerance", prev, tol);
}

}  // namespace coagss
