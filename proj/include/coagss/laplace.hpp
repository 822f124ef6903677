#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "coagss/grid.hpp"

namespace coagss {

struct LaplaceReport {
  std::vector<double> q_grid;
  std::vector<double> U_values;  // U(q) = int_1^inf e^{-qx} u dx
  std::vector<double> V_values;  // V(q) = int_1^inf x^{-alpha} e^{-qx} u dx
  double band_lo = 0.0, band_hi = 0.0;  // extremes of q U(q)
  double V_bound = 0.0;                 // max q^{1-alpha} V(q)
  double nu_norm = 0.0;                 // sup |q Vnu(q)|, nu = u - mu0
  double alpha = 0.0;
};

// Geometric q grid with `count` points on [q_lo, q_hi].
std::vector<double> make_q_grid(double q_lo, double q_hi, int count = 40);

// U(q) per q, with the e^{-qx} weight folded into the tail closure
// analytically; u needs tail_rate (rate 0 is fine, q provides the decay).
std::vector<double> transform_U(const SampledFunction& u, const std::vector<double>& q_grid);

// min/max of q U(q) over the grid.
std::pair<double, double> band_check(const std::vector<double>& U_values,
                                     const std::vector<double>& q_grid, double a_star);

// V(q) and max q^{1-alpha} V(q). alpha = 0 reproduces transform_U bitwise.
std::pair<std::vector<double>, double> transform_V(const SampledFunction& u, double alpha,
                                                   const std::vector<double>& q_grid);

// sup_q |q Vnu(q)| with nu = u - mu0; the constant part is transformed in
// closed form: q Vnu(q) = q U(q) - mu0 e^{-q}.
double perturbation_norm(const SampledFunction& u, double mu0, const std::vector<double>& q_grid);

LaplaceReport laplace_report(const SampledFunction& u, double alpha, double a_star, double mu0,
                             double q_lo = 1e-3);

}  // namespace coagss
