#pragma once

#include <optional>
#include <utility>

#include "coagss/grid.hpp"
#include "coagss/kernels.hpp"

namespace coagss {

// Self-similar profile candidate: nonnegative samples with unit-order mass
// and a kernel it is associated with.
struct Profile {
  SampledFunction f;
  double mass = 0.0;
  KernelSpec kernel;
};

// Validates the profile invariants (finite nonnegative values, positive
// finite mass, x_min^2 f(x_min) <= 1e-3 sup x^2 f) and fits the tail closure
// if absent. Throws InvariantError naming the violated invariant.
Profile make_profile(SampledFunction f, KernelSpec kernel, bool validate = true);

// int_{x_min}^inf x f(x) dx including the exponential closure.
double profile_mass(const SampledFunction& f);

struct SolveOptions {
  double damping = 0.5;           // omega in (0, 1]
  double tol = 1e-9;              // sup-norm relative tolerance
  int max_iter = 200;
  std::optional<SampledFunction> init;  // default: f0 = e^{-x}
};

struct SolveReport {
  int iterations = 0;
  double final_update = 0.0;
  double residual_sup = 0.0;
  double residual_l1 = 0.0;
  bool converged = false;
};

// T[f](x) = x^{-2} int_0^x int_{x-y}^inf K(y,z) y f(y) f(z) dz dy at every
// node. The kernel is split into separable power terms so each inner integral
// is a precomputed weighted tail cumulative; the outer integral is split at
// x/2 and the upper half evaluated in the w = x - y variable so the
// integrable (x-y)^{-alpha}-type end is resolved by the geometric grid.
SampledFunction apply_T(const Profile& p);

// Rescale along the invariance family f -> lambda f(lambda x) so the
// discrete mass is 1 (+- 1e-12); node values are resampled by log-log
// interpolation onto the same grid.
Profile renormalize(const Profile& p);

// Damped fixed-point iteration f <- (1-omega) f + omega renormalize(T[f]).
// Non-convergence is reported (converged=false), not thrown; NaN or negative
// iterates raise NumericalFailureError.
std::pair<Profile, SolveReport> solve_selfsimilar(const KernelSpec& kernel, const Grid& grid,
                                                  const SolveOptions& opts);

// Fill the bottom closure block [0, k_b) by marching the collision identity
// upward from the below-grid extension (live Gauss-Seidel sweep).
void march_bottom(const Grid& grid, const KernelSpec& kernel, double tail_rate,
                  Eigen::Index k_b, Eigen::ArrayXd& values);

// (sup, mass-weighted L1) of the relative defect
// |x^2 f - x^2 T[f]| / (x^2 f + 1e-300) at the nodes.
std::pair<double, double> residual(const Profile& p);

}  // namespace coagss
