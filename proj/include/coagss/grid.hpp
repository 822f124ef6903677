#pragma once

#include <optional>

#include <Eigen/Core>

namespace coagss {

// Geometric node set x_i = x_min * ratio^i with ratio = 10^(1/points_per_decade);
// the last node is the first one >= x_max.
struct Grid {
  double x_min = 0.0;
  double x_max = 0.0;
  int points_per_decade = 0;
  double ratio = 0.0;
  Eigen::ArrayXd nodes;

  Eigen::Index size() const { return nodes.size(); }
  double front() const { return nodes(0); }
  double back() const { return nodes(nodes.size() - 1); }

  // Index of the cell containing x, clamped to [0, size-2]. x must be within
  // [front, back].
  Eigen::Index cell_of(double x) const;
};

Grid build_grid(double x_min, double x_max, int points_per_decade);

// Nonnegative samples on a grid, with an optional exponential tail closure:
// g(x) ~ g(x_N) e^{-tail_rate (x - x_N)} for x beyond the last node.
struct SampledFunction {
  Grid grid;
  Eigen::ArrayXd values;
  std::optional<double> tail_rate;  // >= 0 when present; profiles require > 0

  Eigen::Index size() const { return values.size(); }
};

SampledFunction make_sampled(Grid grid, Eigen::ArrayXd values,
                             std::optional<double> tail_rate = std::nullopt);

// Log-log linear interpolation between bracketing nodes (linear in x if a
// bracketing value is zero); exact at nodes; exponential closure past the
// last node; x < x_min is a DomainError.
double interp(const SampledFunction& g, double x);

// Least-squares exponential rate over the last quarter of the nodes with
// values above 1e-250: log g ~ c - rate * x. nullopt when no positive rate
// can be fitted.
std::optional<double> fit_tail_rate(const SampledFunction& g);

}  // namespace coagss
