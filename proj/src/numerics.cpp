#include "coagss/numerics.hpp"

#include <limits>

#include "coagss/errors.hpp"

namespace coagss {

namespace {
// Classic n=10 abscissae/weights on [-1,1], mapped to [0,1] below.
constexpr std::array<double, 5> kAbscissae = {
    0.14887433898163121, 0.43339539412924719, 0.67940956829902441,
    0.86506336668898451, 0.97390652851717172};
constexpr std::array<double, 5> kWeights = {
    0.29552422471475287, 0.26926671930999635, 0.21908636251598204,
    0.14945134915058059, 0.066671344308688138};

std::array<double, 10> make_nodes() {
  std::array<double, 10> t{};
  for (int i = 0; i < 5; ++i) {
    t[i] = 0.5 * (1.0 - kAbscissae[4 - i]);
    t[9 - i] = 0.5 * (1.0 + kAbscissae[4 - i]);
  }
  return t;
}

std::array<double, 10> make_weights() {
  std::array<double, 10> w{};
  for (int i = 0; i < 5; ++i) {
    w[i] = 0.5 * kWeights[4 - i];
    w[9 - i] = 0.5 * kWeights[4 - i];
  }
  return w;
}
}  // namespace

const std::array<double, 10> Gauss10::nodes = make_nodes();
const std::array<double, 10> Gauss10::weights = make_weights();

LineFit fit_line(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y) {
  LineFit out;
  out.count = static_cast<int>(x.size());
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_line needs >= 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = x.mean();
  const double my = y.mean();
  const double sxx = ((x - mx) * (x - mx)).sum();
  const double sxy = ((x - mx) * (y - my)).sum();
  if (sxx <= 0.0) throw DomainError("fit_line: degenerate abscissae");
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  const double ss_tot = ((y - my) * (y - my)).sum();
  const Eigen::ArrayXd res = y - (out.intercept + out.slope * x);
  const double ss_res = (res * res).sum();
  out.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  (void)n;
  return out;
}

namespace {

// Lower regularized series, valid and fast for z < s + 1.
double log_gamma_lower_series(double s, double z) {
  double term = 1.0 / s;
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= z / (s + k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return s * std::log(z) - z + std::log(sum);
}

// Continued fraction for Gamma(s,z), good for z >= s + 1 (modified Lentz).
double log_gamma_upper_cf(double s, double z) {
  const double tiny = 1e-300;
  double b = z + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return s * std::log(z) - z + std::log(h);
}

}  // namespace

double log_gamma_upper(double s, double z) {
  if (!(s > 0.0) || !(z >= 0.0)) throw DomainError("log_gamma_upper requires s > 0, z >= 0");
  if (z == 0.0) return std::lgamma(s);
  if (z < s + 1.0) {
    // Gamma(s,z) = Gamma(s) - gamma_lower(s,z), no harmful cancellation here.
    const double lg = std::lgamma(s);
    const double ll = log_gamma_lower_series(s, z);
    const double lower = std::exp(ll - lg);  // regularized, < ~0.8 in this branch
    return lg + std::log1p(-lower);
  }
  return log_gamma_upper_cf(s, z);
}

double gamma_upper(double s, double z) { return std::exp(log_gamma_upper(s, z)); }

}  // namespace coagss
