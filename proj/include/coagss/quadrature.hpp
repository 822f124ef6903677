#pragma once

#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "coagss/grid.hpp"

namespace coagss {

// Piecewise reconstruction of a sampled function used by every integral in
// the library. On each cell the log of the function is modelled by the
// Lagrange cubic through the four nearest node logs (one-sided stencils at
// the ends, log-linear on short data or next to zero values, linear in x
// against a single zero endpoint). The model is exact for pure power laws and
// integrates exponential tails with O(h^4) in-cell error; all cell integrals
// evaluate the model under Gauss-Legendre, with the weight x^gamma e^{-qx}
// folded into the exponent.
class CellModel {
 public:
  // rate > 0 subtracts b*x from the log before the cubic fit and adds it
  // back on evaluation, making the model exact for c x^p e^{-bx}; the
  // profile class. SampledFunction constructor picks up its tail_rate.
  CellModel(const Eigen::ArrayXd& nodes, const Eigen::ArrayXd& values, double rate = 0.0);
  explicit CellModel(const SampledFunction& g);

  // Model value at x in [nodes.front(), nodes.back()].
  double eval(double x) const;

  // int_{a}^{b} x^gamma e^{-qx} g(x) dx over [a,b] within the node range.
  double integrate(double a, double b, double gamma, double q = 0.0) const;

  // Same integral restricted to one cell, with [ta, tb] in cell coordinates.
  double cell_integral(Eigen::Index cell, double ta, double tb, double gamma, double q) const;

  Eigen::Index cells() const { return n_ - 1; }
  const Eigen::ArrayXd& nodes() const { return x_; }

 private:
  enum class Kind : unsigned char { Cubic, Power, LinearX, Zero };

  double log_model(Eigen::Index cell, double tau) const;

  Eigen::Index n_;
  double rate_;
  Eigen::ArrayXd x_;
  Eigen::ArrayXd v_;
  Eigen::ArrayXd t_;      // ln x
  Eigen::ArrayXd s_;      // ln v + rate*x where v > 0
  std::vector<Kind> kind_;
  std::vector<int> stencil_;  // first stencil index per cell (Cubic cells)
};

// Node window [first, second) just above the bottom block, used both to fit
// the below-grid power extension and to slave the bottom nodes in the solver.
std::pair<Eigen::Index, Eigen::Index> bottom_fit_window(const Grid& g);

// Power-law extension g(x) ~ value0 (x/x0)^p below the grid, fitted on
// bottom_fit_window; the same extrapolation the sub-x_min mass guard uses.
struct BelowGridExtension {
  double x0 = 0.0;
  double value0 = 0.0;
  double p = 0.0;

  static BelowGridExtension from(const SampledFunction& g);
  // int_w^{x0} z^gamma g~(z) dz for w in [0, x0].
  double integral_to_x0(double w, double gamma) const;
};

// G(w) = int_w^inf x^gamma g(x) dx, assembled by downward recursion over the
// grid cells plus the closed-form closure beyond the last node. eval() is
// consistent with the node values (partial cells integrate the same model);
// below the first node the integrand follows the power-law extension.
class TailCumulative {
 public:
  TailCumulative(const SampledFunction& g, double gamma);

  const Eigen::ArrayXd& node_values() const { return node_values_; }
  double eval(double w) const;
  double gamma() const { return gamma_; }

 private:
  double closure_from(double a) const;

  const double gamma_;
  double rate_ = 0.0;       // closure rate
  double top_value_ = 0.0;  // g at last node
  double top_x_ = 0.0;
  CellModel model_;
  Eigen::ArrayXd nodes_;
  Eigen::ArrayXd node_values_;
  BelowGridExtension below_;
};

// int_a^b x^gamma g(x) dx; b may be +infinity, which requires a tail closure
// with tail_rate + q > 0. The optional q folds e^{-qx} into the weight.
double integrate(const SampledFunction& g, double a, double b, double gamma, double q = 0.0);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Spec surface: sampled x -> int_x^inf s^gamma g(s) ds at every node.
SampledFunction tail_cumulative(const SampledFunction& g, double gamma);

}  // namespace coagss
