#pragma once

#include <utility>
#include <vector>

#include "coagss/solver.hpp"

namespace coagss {

struct AstarFit {
  double a_star = 0.0;
  double x_lo = 0.0, x_hi = 0.0;  // fit window
  double r2 = 0.0;
  bool trusted = false;           // r2 >= 0.999
};

struct SandwichBounds {
  double C1 = 0.0, alpha1 = 0.0;  // lower envelope C1 e^{-alpha1 x}
  double C2 = 0.0, alpha2 = 0.0;  // upper envelope C2 e^{-alpha2 x}
  double delta = 0.0;             // relative bracket around a*
  double x_lo = 1.0, x_hi = 0.0;  // range the bounds were built on
};

struct TailReport {
  AstarFit fit;
  SandwichBounds sandwich;
  double doubling_margin = 0.0;
  double mu0 = 0.0;
  double u_sup_dev = 0.0;      // sup over the fit window of |u - mu0|
  double window_stability = 0.0;  // max relative a* change under +-10% shifts
  bool mu0_valid = false;
};

struct MomentReport {
  std::vector<double> gammas;
  std::vector<double> M_values;   // M(gamma) = int x^gamma f dx
  double A_fit = 0.0;             // smallest A with M(g) <= g^g e^{Ag}
  double neg_moment_gamma = 0.5;
  double neg_moment = 0.0;        // int x^{1-gamma} f dx
  double dyadic_sup = 0.0;        // sup_R (1/R) int_{R/2}^R x f dx
};

struct PositivityScan {
  double x_tilde = 0.0;
  bool degenerate = false;
};

// a(x) = -log f(x) / x on the nodes >= 1. f <= 0 at a node in range raises
// PositivityError carrying the node.
SampledFunction slope_a(const Profile& p);

// Least squares on -log f vs x over [x_max/4, 3 x_max/4].
AstarFit estimate_astar(const Profile& p);

// Max relative change of a* when the fit window is shifted by +-frac*x_max.
double astar_window_stability(const Profile& p, double frac = 0.1);

// Bracket a* by alpha1 = a*(1+d), alpha2 = a*(1-d) with the smallest d in
// {0.01,0.02,0.05,0.1,0.2} giving positive finite constants on [1, x_hi];
// throws TailNotExponentialError when none does.
SandwichBounds fit_exponential_bounds(const Profile& p, double a_star);

// True iff C1 e^{-a1 x} <= f <= C2 e^{-a2 x} at every node in [b.x_lo, b.x_hi].
bool sandwich_holds(const Profile& p, const SandwichBounds& b);

// min over tested x (with X = 2x-2 on the grid range) of
// log(C (X+1))/X - (a(X) - a(x)); positive margin means the doubling bound
// holds with the given C.
double doubling_check(const Profile& p, double C = 10.0);

// M_delta(x) = max_{delta x <= y <= x} a(y), reported on the nodes with
// delta*x >= 1.
SampledFunction flatness_profile(const Profile& p, double delta);

// u(x) = f(x) e^{a* x} (computed in log space); tail_rate = max(fitted, 0).
SampledFunction prefactor_u(const Profile& p, double a_star);

// (R, (1/R) int_1^{AR} u dx) for each R; RangeError if A*R exceeds the grid.
std::vector<std::pair<double, double>> prefactor_averages(const SampledFunction& u, double A,
                                                          const std::vector<double>& R_list);

// mu0 = 2 a* / int_0^1 K(s,1-s) ds.
double mu_constant(const KernelSpec& kernel, double a_star);

// sup over test points of |x mu(x) - (1/2a*) int_0^x K(y,x-y) mu(x-y) mu(y) dy|
// relative to x mu(x). The convolution is split symmetrically at x/2 with
// geometric grading toward the endpoint; mu is extended by its first node
// value below the grid.
double mu_residual(const SampledFunction& mu, const KernelSpec& kernel, double a_star,
                   const std::vector<double>& test_points);

MomentReport moments(const Profile& p, const std::vector<double>& gammas,
                     double neg_moment_gamma = 0.5);

// Sum of |f(x_{i+1}) - f(x_i)| over [a,b] with interpolated partial ends.
double tv_of_samples(const SampledFunction& g, double a, double b);

// Total variation of the re-solved profile on [a,b] per refinement level
// (points per decade).
std::vector<double> total_variation(const Profile& p, double a, double b,
                                    const std::vector<int>& refinement_levels);

PositivityScan positivity_radius(const Profile& p);

}  // namespace coagss
