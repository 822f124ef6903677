#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include <Eigen/Core>

namespace coagss {

// 10-point Gauss-Legendre rule on [0,1].
struct Gauss10 {
  static constexpr int n = 10;
  static const std::array<double, 10> nodes;
  static const std::array<double, 10> weights;
};

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
  int count = 0;
};

// Ordinary least squares y ~ intercept + slope*x.
LineFit fit_line(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y);

// log of the upper incomplete gamma function, log Gamma(s, z), s > 0, z >= 0.
double log_gamma_upper(double s, double z);

double gamma_upper(double s, double z);

// Euler beta function, test oracles and kernel boundary integrals use it.
inline double beta_function(double a, double b) {
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

}  // namespace coagss
