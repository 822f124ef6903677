#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace coagss {

enum class KernelVariant { Constant, BrownianHomog, PerturbedConstant };

// Symmetric rate kernel of homogeneity zero together with its structural
// constants: singularity exponent alpha, envelope constant K0 such that
//   K(x,y) <= K0 ((x/y)^alpha + (y/x)^alpha),
// diagonal lower bound k0 on the band |x-y| <= kappa (x+y), and the
// derivative constant C with |d/dx K| <= C (1/x)((x/y)^alpha+(y/x)^alpha).
// Constants are stored analytically per variant; verify_bounds is the
// independent sampled audit.
struct KernelSpec {
  KernelVariant variant = KernelVariant::Constant;
  double c = 2.0;      // Constant value
  double eps = 0.0;    // PerturbedConstant amplitude, in [0,1)
  double alpha = 0.0;  // singularity exponent, in [0,1)
  double K0 = 1.0;
  double k0 = 2.0;
  double kappa = 1.0;
  double deriv_bound = 0.0;

  std::string name() const;
};

KernelSpec make_constant_kernel(double c = 2.0);
KernelSpec make_brownian_kernel();
KernelSpec make_perturbed_kernel(double eps, double alpha);

// K(x,y). Symmetric by construction (defined through max(x,y)/min(x,y)),
// homogeneous of degree zero. Nonpositive arguments -> DomainError.
double eval(const KernelSpec& kernel, double x, double y);

// K(y,z) = sum_j coef_j * y^{beta_j} z^{-beta_j}; the solver reduces the
// inner integrals of the collision operator to one weighted tail cumulative
// per term.
struct KernelTerm {
  double coef;
  double beta;
};
std::vector<KernelTerm> separable_terms(const KernelSpec& kernel);

struct KernelBoundsReport {
  double K0_fit = 0.0;               // tightest envelope constant found
  double k0_fit = 0.0;               // min over the diagonal band
  double alpha_used = 0.0;
  double derivative_bound_fit = 0.0; // tightest C found by finite differences
  double kappa = 1.0;
  std::int64_t samples = 0;
};

// Sampled audit of the stored constants; log-uniform pairs on [1e-8, 1e8],
// deterministic for a fixed seed. sample_count >= 100.
KernelBoundsReport verify_bounds(const KernelSpec& kernel, std::int64_t sample_count,
                                 std::uint64_t seed);

// I_K = int_0^1 K(s, 1-s) ds, accurate to the requested relative tolerance
// despite the integrable endpoint singularities s^{-alpha}, (1-s)^{-alpha}.
// tol in (0, 1e-3]. Throws ConvergenceError (carrying the achieved estimate)
// if the subdivision budget is exhausted.
double boundary_integral(const KernelSpec& kernel, double tol = 1e-10);

}  // namespace coagss
