#include "coagss/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <utility>

#include "coagss/errors.hpp"
#include "coagss/quadrature.hpp"

namespace coagss {

std::vector<double> make_q_grid(double q_lo, double q_hi, int count) {
  if (!(q_lo > 0.0 && q_hi > q_lo) || count < 2) throw DomainError("bad q grid");
  std::vector<double> q(count);
  const double step = std::log(q_hi / q_lo) / (count - 1);
  for (int i = 0; i < count; ++i) q[i] = q_lo * std::exp(step * i);
  q[count - 1] = q_hi;
  return q;
}

namespace {

double transform_at(const SampledFunction& u, double gamma, double q) {
  if (!(q > 0.0)) throw DomainError("transform needs q > 0");
  if (u.grid.back() <= 1.0) throw RangeError("transform needs the grid to extend past x = 1");
  if (!u.tail_rate) throw ClosureMissingError("transform needs a tail closure (rate >= 0)");
  return integrate(u, 1.0, kInf, gamma, q);
}

}  // namespace

std::vector<double> transform_U(const SampledFunction& u, const std::vector<double>& q_grid) {
  std::vector<double> out;
  out.reserve(q_grid.size());
  for (double q : q_grid) out.push_back(transform_at(u, 0.0, q));
  return out;
}

std::pair<double, double> band_check(const std::vector<double>& U_values,
                                     const std::vector<double>& q_grid, double a_star) {
  if (U_values.size() != q_grid.size() || q_grid.empty())
    throw DomainError("band_check needs matching nonempty grids");
  (void)a_star;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    const double qu = q_grid[i] * U_values[i];
    lo = std::min(lo, qu);
    hi = std::max(hi, qu);
  }
  return {lo, hi};
}

std::pair<std::vector<double>, double> transform_V(const SampledFunction& u, double alpha,
                                                   const std::vector<double>& q_grid) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("transform_V needs alpha in [0,1)");
  std::vector<double> out;
  out.reserve(q_grid.size());
  double bound = 0.0;
  for (double q : q_grid) {
    const double v = transform_at(u, -alpha, q);
    out.push_back(v);
    bound = std::max(bound, std::pow(q, 1.0 - alpha) * v);
  }
  return {std::move(out), bound};
}

double perturbation_norm(const SampledFunction& u, double mu0,
                         const std::vector<double>& q_grid) {
  if (!(mu0 > 0.0)) throw DomainError("perturbation_norm needs mu0 > 0");
  double sup = 0.0;
  for (double q : q_grid) {
    const double qU = q * transform_at(u, 0.0, q);
    sup = std::max(sup, std::fabs(qU - mu0 * std::exp(-q)));
  }
  return sup;
}

LaplaceReport laplace_report(const SampledFunction& u, double alpha, double a_star, double mu0,
                             double q_lo) {
  LaplaceReport rep;
  rep.alpha = alpha;
  rep.q_grid = make_q_grid(q_lo, a_star / 2.0);
  rep.U_values = transform_U(u, rep.q_grid);
  std::tie(rep.band_lo, rep.band_hi) = band_check(rep.U_values, rep.q_grid, a_star);
  auto [v, bound] = transform_V(u, alpha, rep.q_grid);
  rep.V_values = std::move(v);
  rep.V_bound = bound;
  rep.nu_norm = mu0 > 0.0 ? perturbation_norm(u, mu0, rep.q_grid) : 0.0;
  return rep;
}

}  // namespace coagss
