#include <algorithm>
#include <cmath>
#include <vector>

#include "coagss/errors.hpp"
#include "coagss/grid.hpp"
#include "coagss/numerics.hpp"
#include "coagss/quadrature.hpp"

namespace coagss {

Eigen::Index Grid::cell_of(double x) const {
  const Eigen::Index n = nodes.size();
  Eigen::Index j = static_cast<Eigen::Index>(
      std::floor(std::log10(x / x_min) * points_per_decade));
  j = std::clamp<Eigen::Index>(j, 0, n - 2);
  while (j > 0 && x < nodes(j)) --j;
  while (j < n - 2 && x > nodes(j + 1)) ++j;
  return j;
}

Grid build_grid(double x_min, double x_max, int points_per_decade) {
  if (!(x_min > 0.0) || !(x_max > x_min) || !std::isfinite(x_max))
    throw DomainError("build_grid needs 0 < x_min < x_max");
  if (points_per_decade < 8) throw DomainError("build_grid needs points_per_decade >= 8");
  Grid g;
  g.x_min = x_min;
  g.x_max = x_max;
  g.points_per_decade = points_per_decade;
  g.ratio = std::pow(10.0, 1.0 / points_per_decade);
  const double span = std::log10(x_max / x_min) * points_per_decade;
  Eigen::Index count = static_cast<Eigen::Index>(std::ceil(span - 1e-9)) + 1;
  if (count < 2) count = 2;
  g.nodes.resize(count);
  for (Eigen::Index i = 0; i < count; ++i)
    g.nodes(i) = x_min * std::pow(10.0, static_cast<double>(i) / points_per_decade);
  g.nodes(0) = x_min;
  return g;
}

SampledFunction make_sampled(Grid grid, Eigen::ArrayXd values, std::optional<double> tail_rate) {
  if (grid.size() != values.size()) throw DomainError("sampled function size mismatch");
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (!std::isfinite(values(i)) || values(i) < 0.0)
      throw DomainError("sampled values must be finite and nonnegative");
  if (tail_rate && !(*tail_rate >= 0.0)) throw DomainError("tail_rate must be >= 0");
  SampledFunction g;
  g.grid = std::move(grid);
  g.values = std::move(values);
  g.tail_rate = tail_rate;
  return g;
}

double interp(const SampledFunction& g, double x) {
  const auto& xs = g.grid.nodes;
  const Eigen::Index n = xs.size();
  if (!(x > 0.0) || x < xs(0)) throw DomainError("interp: x below the grid");
  if (x > xs(n - 1)) {
    if (!g.tail_rate || !(*g.tail_rate > 0.0))
      throw ClosureMissingError("interp beyond the last node needs a positive tail_rate");
    return g.values(n - 1) * std::exp(-(*g.tail_rate) * (x - xs(n - 1)));
  }
  const Eigen::Index j = g.grid.cell_of(x);
  if (x == xs(j)) return g.values(j);
  if (x == xs(j + 1)) return g.values(j + 1);
  const double v0 = g.values(j), v1 = g.values(j + 1);
  if (v0 > 0.0 && v1 > 0.0) {
    const double th = (std::log(x) - std::log(xs(j))) / (std::log(xs(j + 1)) - std::log(xs(j)));
    return std::exp(std::log(v0) + th * (std::log(v1) - std::log(v0)));
  }
  const double th = (x - xs(j)) / (xs(j + 1) - xs(j));
  return v0 + th * (v1 - v0);
}

std::optional<double> fit_tail_rate(const SampledFunction& g) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (g.values(i) > 1e-250 && std::isfinite(g.values(i))) idx.push_back(i);
  if (idx.size() < 2) return std::nullopt;
  const std::size_t take = std::max<std::size_t>(2, (idx.size() + 3) / 4);
  Eigen::ArrayXd xs(take), ys(take);
  for (std::size_t k = 0; k < take; ++k) {
    const Eigen::Index i = idx[idx.size() - take + k];
    xs(k) = g.grid.nodes(i);
    ys(k) = std::log(g.values(i));
  }
  const LineFit fit = fit_line(xs, ys);
  if (!(fit.slope < 0.0) || !std::isfinite(fit.slope)) return std::nullopt;
  return -fit.slope;
}

// ---------------------------------------------------------------------------
// CellModel

CellModel::CellModel(const Eigen::ArrayXd& nodes, const Eigen::ArrayXd& values, double rate)
    : n_(nodes.size()), rate_(rate), x_(nodes), v_(values) {
  if (n_ < 2 || v_.size() != n_) throw DomainError("CellModel needs >= 2 nodes");
  t_ = x_.log();
  s_.resize(n_);
  for (Eigen::Index i = 0; i < n_; ++i)
    s_(i) = v_(i) > 0.0 ? std::log(v_(i)) + rate_ * x_(i) : 0.0;
  kind_.resize(n_ - 1);
  stencil_.resize(n_ - 1, 0);
  for (Eigen::Index i = 0; i + 1 < n_; ++i) {
    const bool p0 = v_(i) > 0.0, p1 = v_(i + 1) > 0.0;
    if (!p0 && !p1) {
      kind_[i] = Kind::Zero;
      continue;
    }
    if (!(p0 && p1)) {
      kind_[i] = Kind::LinearX;
      continue;
    }
    if (n_ >= 4) {
      Eigen::Index j0 = std::clamp<Eigen::Index>(i - 1, 0, n_ - 4);
      bool ok = true;
      for (Eigen::Index k = j0; k < j0 + 4; ++k) ok = ok && v_(k) > 0.0;
      if (ok) {
        kind_[i] = Kind::Cubic;
        stencil_[i] = static_cast<int>(j0);
        continue;
      }
    }
    kind_[i] = Kind::Power;
  }
}

CellModel::CellModel(const SampledFunction& g)
    : CellModel(g.grid.nodes, g.values, g.tail_rate.value_or(0.0)) {}

double CellModel::log_model(Eigen::Index cell, double tau) const {
  const double h = t_(cell + 1) - t_(cell);
  if (kind_[cell] == Kind::Power)
    return s_(cell) + tau * (s_(cell + 1) - s_(cell));
  // Lagrange cubic through the stencil logs, in units of this cell's width.
  const int j0 = stencil_[cell];
  double p[4], sv[4];
  for (int k = 0; k < 4; ++k) {
    p[k] = (t_(j0 + k) - t_(cell)) / h;
    sv[k] = s_(j0 + k);
  }
  double acc = 0.0;
  for (int k = 0; k < 4; ++k) {
    double basis = 1.0;
    for (int m = 0; m < 4; ++m)
      if (m != k) basis *= (tau - p[m]) / (p[k] - p[m]);
    acc += sv[k] * basis;
  }
  return acc;
}

double CellModel::eval(double x) const {
  if (x < x_(0) * (1.0 - 1e-14) || x > x_(n_ - 1) * (1.0 + 1e-14))
    throw DomainError("CellModel::eval outside node range");
  x = std::clamp(x, x_(0), x_(n_ - 1));
  const double* begin = x_.data();
  Eigen::Index j = std::upper_bound(begin, begin + n_, x) - begin - 1;
  j = std::clamp<Eigen::Index>(j, 0, n_ - 2);
  if (x == x_(j)) return v_(j);
  if (x == x_(j + 1)) return v_(j + 1);
  switch (kind_[j]) {
    case Kind::Zero: return 0.0;
    case Kind::LinearX: {
      const double th = (x - x_(j)) / (x_(j + 1) - x_(j));
      return v_(j) + th * (v_(j + 1) - v_(j));
    }
    default: {
      const double tau = (std::log(x) - t_(j)) / (t_(j + 1) - t_(j));
      return std::exp(log_model(j, tau) - rate_ * x);
    }
  }
}

double CellModel::cell_integral(Eigen::Index cell, double ta, double tb, double gamma,
                                double q) const {
  if (!(tb > ta)) return 0.0;
  if (kind_[cell] == Kind::Zero) return 0.0;
  const double h = t_(cell + 1) - t_(cell);
  const double width = tb - ta;
  double acc = 0.0;
  if (kind_[cell] == Kind::LinearX) {
    for (int gph = 0; gph < Gauss10::n; ++gph) {
      const double tau = ta + width * Gauss10::nodes[gph];
      const double t = t_(cell) + tau * h;
      const double x = std::exp(t);
      const double th = (x - x_(cell)) / (x_(cell + 1) - x_(cell));
      const double val = v_(cell) + th * (v_(cell + 1) - v_(cell));
      acc += Gauss10::weights[gph] * val * std::exp((gamma + 1.0) * t - q * x);
    }
    return acc * h * width;
  }
  for (int gph = 0; gph < Gauss10::n; ++gph) {
    const double tau = ta + width * Gauss10::nodes[gph];
    const double t = t_(cell) + tau * h;
    acc += Gauss10::weights[gph] *
           std::exp(log_model(cell, tau) + (gamma + 1.0) * t - (q + rate_) * std::exp(t));
  }
  return acc * h * width;
}

double CellModel::integrate(double a, double b, double gamma, double q) const {
  const double lo = x_(0), hi = x_(n_ - 1);
  if (a < lo * (1.0 - 1e-12) || b > hi * (1.0 + 1e-12) || !(a < b))
    throw DomainError("CellModel::integrate bounds outside node range");
  a = std::clamp(a, lo, hi);
  b = std::clamp(b, lo, hi);
  const double* begin = x_.data();
  Eigen::Index ja = std::clamp<Eigen::Index>(std::upper_bound(begin, begin + n_, a) - begin - 1,
                                             0, n_ - 2);
  Eigen::Index jb = std::clamp<Eigen::Index>(std::upper_bound(begin, begin + n_, b) - begin - 1,
                                             0, n_ - 2);
  auto tau_of = [&](Eigen::Index c, double x) {
    return std::clamp((std::log(x) - t_(c)) / (t_(c + 1) - t_(c)), 0.0, 1.0);
  };
  if (ja == jb) return cell_integral(ja, tau_of(ja, a), tau_of(ja, b), gamma, q);
  double acc = cell_integral(ja, tau_of(ja, a), 1.0, gamma, q);
  for (Eigen::Index c = ja + 1; c < jb; ++c) acc += cell_integral(c, 0.0, 1.0, gamma, q);
  acc += cell_integral(jb, 0.0, tau_of(jb, b), gamma, q);
  return acc;
}

// ---------------------------------------------------------------------------
// Tail cumulatives and integrate()

namespace {

// int_a^inf x^gamma e^{-qx} * v_top e^{-rate (x - x_top)} dx, a >= x_top.
double closure_integral(double v_top, double x_top, double rate, double a, double gamma,
                        double q) {
  if (v_top == 0.0) return 0.0;
  const double B = rate + q;
  if (!(B > 0.0))
    throw ClosureMissingError("infinite-range integral needs tail_rate + q > 0");
  const double s = gamma + 1.0;
  if (!(s > 0.0)) throw DomainError("closure integral needs gamma > -1");
  const double lg = log_gamma_upper(s, B * a);
  return std::exp(std::log(v_top) + rate * x_top + lg - s * std::log(B));
}

}  // namespace

std::pair<Eigen::Index, Eigen::Index> bottom_fit_window(const Grid& g) {
  // The window sits above the bottom block so that the extension (and the
  // nodes slaved to it) never feed their own fit; a fit touching the first
  // nodes gives the bottom a self-gain > 1 and the iteration creeps away.
  const Eigen::Index n = g.size();
  const Eigen::Index k0 = std::min<Eigen::Index>(std::max<Eigen::Index>(
                              1, (3 * g.points_per_decade) / 8), n / 6);
  const Eigen::Index w = std::min<Eigen::Index>(
      std::max<Eigen::Index>(3, g.points_per_decade / 2 + 2), std::max<Eigen::Index>(3, n / 4));
  return {k0, std::min(n, k0 + w)};
}

BelowGridExtension BelowGridExtension::from(const SampledFunction& g) {
  BelowGridExtension e;
  e.x0 = g.grid.front();
  e.value0 = g.values(0);
  e.p = 0.0;
  const auto [k_lo, k_hi] = bottom_fit_window(g.grid);
  std::vector<double> ts, ss;
  for (Eigen::Index i = k_lo; i < k_hi; ++i) {
    if (!(g.values(i) > 0.0)) {
      ts.clear();
      break;
    }
    ts.push_back(std::log(g.grid.nodes(i)));
    ss.push_back(std::log(g.values(i)));
  }
  if (ts.size() >= 2) {
    const LineFit fit = fit_line(Eigen::Map<Eigen::ArrayXd>(ts.data(), ts.size()),
                                 Eigen::Map<Eigen::ArrayXd>(ss.data(), ss.size()));
    if (std::isfinite(fit.slope) && std::isfinite(fit.intercept)) {
      e.p = std::clamp(fit.slope, -1.9, 20.0);
      e.value0 = std::exp(fit.intercept + fit.slope * std::log(e.x0));
    }
  }
  return e;
}

double BelowGridExtension::integral_to_x0(double w, double gamma) const {
  if (value0 == 0.0 || !(w < x0)) return 0.0;
  const double s = std::max(gamma + p + 1.0, 0.05);
  const double r = std::max(w, 0.0) / x0;
  return value0 * x0 * std::pow(x0, gamma) / s * (1.0 - std::pow(r, s));
}

TailCumulative::TailCumulative(const SampledFunction& g, double gamma)
    : gamma_(gamma), model_(g), nodes_(g.grid.nodes) {
  const Eigen::Index n = nodes_.size();
  top_x_ = nodes_(n - 1);
  top_value_ = g.values(n - 1);
  if (g.tail_rate && *g.tail_rate > 0.0) {
    rate_ = *g.tail_rate;
  } else if (top_value_ == 0.0) {
    rate_ = 0.0;  // closure contributes nothing
  } else {
    throw ClosureMissingError("tail_cumulative needs a positive tail_rate");
  }
  below_ = BelowGridExtension::from(g);
  node_values_.resize(n);
  node_values_(n - 1) = closure_from(top_x_);
  for (Eigen::Index i = n - 2; i >= 0; --i)
    node_values_(i) = node_values_(i + 1) + model_.cell_integral(i, 0.0, 1.0, gamma_, 0.0);
}

double TailCumulative::closure_from(double a) const {
  if (top_value_ == 0.0) return 0.0;
  return closure_integral(top_value_, top_x_, rate_, a, gamma_, 0.0);
}

double TailCumulative::eval(double w) const {
  const Eigen::Index n = nodes_.size();
  if (w <= nodes_(0)) return node_values_(0) + below_.integral_to_x0(w, gamma_);
  if (w >= nodes_(n - 1)) return closure_from(w);
  const double* begin = nodes_.data();
  Eigen::Index j = std::clamp<Eigen::Index>(std::upper_bound(begin, begin + n, w) - begin - 1,
                                            0, n - 2);
  if (w == nodes_(j)) return node_values_(j);
  const double tj = std::log(nodes_(j));
  const double tau = std::clamp((std::log(w) - tj) / (std::log(nodes_(j + 1)) - tj), 0.0, 1.0);
  return node_values_(j + 1) + model_.cell_integral(j, tau, 1.0, gamma_, 0.0);
}

double integrate(const SampledFunction& g, double a, double b, double gamma, double q) {
  const double lo = g.grid.front(), hi = g.grid.back();
  if (!(a >= lo * (1.0 - 1e-12))) throw DomainError("integrate: a below x_min");
  if (!(b > a)) throw DomainError("integrate: needs a < b");
  const CellModel model(g);
  double acc = 0.0;
  const double grid_b = std::min(b, hi);
  if (grid_b > a) acc += model.integrate(std::max(a, lo), grid_b, gamma, q);
  if (b > hi) {
    const double rate = g.tail_rate.value_or(-1.0);
    if (g.values(g.size() - 1) == 0.0) return acc;
    if (!(rate >= 0.0))
      throw ClosureMissingError("integrate beyond the grid needs a tail closure");
    const double from = std::max(a, hi);
    if (std::isinf(b)) {
      acc += closure_integral(g.values(g.size() - 1), hi, rate, from, gamma, q);
    } else {
      acc += closure_integral(g.values(g.size() - 1), hi, rate, from, gamma, q) -
             closure_integral(g.values(g.size() - 1), hi, rate, b, gamma, q);
    }
  }
  return acc;
}

SampledFunction tail_cumulative(const SampledFunction& g, double gamma) {
  TailCumulative cum(g, gamma);
  SampledFunction out;
  out.grid = g.grid;
  out.values = cum.node_values();
  out.tail_rate = g.tail_rate;
  return out;
}

}  // namespace coagss
