#include "coagss/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "coagss/errors.hpp"
#include "coagss/quadrature.hpp"

namespace coagss {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json kernel_json(const KernelSpec& k) {
  nlohmann::json j;
  j["variant"] = k.name();
  if (k.variant == KernelVariant::Constant) j["c"] = k.c;
  if (k.variant == KernelVariant::PerturbedConstant) j["eps"] = k.eps;
  j["alpha"] = k.alpha;
  j["K0"] = k.K0;
  j["k0"] = k.k0;
  j["kappa"] = k.kappa;
  return j;
}

nlohmann::json grid_json(const Grid& g) {
  nlohmann::json j;
  j["x_min"] = g.x_min;
  j["x_max"] = g.x_max;
  j["points_per_decade"] = g.points_per_decade;
  j["nodes"] = g.size();
  return j;
}

}  // namespace

std::string profile_to_csv(const Profile& p) {
  std::string out = "x,f,a,u\n";
  double a_star = 0.0;
  bool have_astar = false;
  try {
    a_star = estimate_astar(p).a_star;
    have_astar = a_star > 0.0;
  } catch (const Error&) {
    have_astar = false;
  }
  const Eigen::ArrayXd& xs = p.f.grid.nodes;
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    const double x = xs(i);
    const double f = p.f.values(i);
    const double a = f > 0.0 ? -std::log(f) / x : std::numeric_limits<double>::quiet_NaN();
    const double u = (f > 0.0 && have_astar) ? std::exp(std::log(f) + a_star * x)
                                             : (f == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN());
    out += fmt17(x);
    out += ',';
    out += fmt17(f);
    out += ',';
    out += fmt17(a);
    out += ',';
    out += fmt17(u);
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << content;
  if (!f) throw IoError("write failed: " + path);
}

void write_profile_csv(const Profile& p, const std::string& path) {
  write_text_file(path, profile_to_csv(p));
}

Profile read_profile_csv(const std::string& path, const KernelSpec& kernel, bool validate) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open profile: " + path);
  std::string line;
  if (!std::getline(f, line)) throw IoError("empty profile file: " + path);
  if (line != "x,f,a,u") throw IoError("unexpected profile header: " + line);
  std::vector<double> xs, fs;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    double row[2];
    for (int c = 0; c < 2; ++c) {
      if (!std::getline(ss, field, ',')) throw IoError("short row in profile: " + line);
      try {
        row[c] = std::stod(field);
      } catch (const std::exception&) {
        throw IoError("bad number in profile: " + field);
      }
    }
    xs.push_back(row[0]);
    fs.push_back(row[1]);
  }
  if (xs.size() < 2) throw IoError("profile needs at least two rows");

  Grid g;
  g.nodes = Eigen::Map<Eigen::ArrayXd>(xs.data(), xs.size());
  for (Eigen::Index i = 0; i + 1 < g.nodes.size(); ++i)
    if (!(g.nodes(i) < g.nodes(i + 1))) throw IoError("profile nodes must be increasing");
  g.x_min = g.nodes(0);
  g.x_max = g.nodes(g.nodes.size() - 1);
  const double ratio = g.nodes(1) / g.nodes(0);
  g.points_per_decade = static_cast<int>(std::lround(1.0 / std::log10(ratio)));
  if (g.points_per_decade < 1) throw IoError("profile nodes are not geometric");
  g.ratio = std::pow(10.0, 1.0 / g.points_per_decade);
  if (std::fabs(g.ratio - ratio) > 1e-9 * ratio)
    throw IoError("profile nodes are not a geometric grid");

  SampledFunction sf;
  sf.grid = std::move(g);
  sf.values = Eigen::Map<Eigen::ArrayXd>(fs.data(), fs.size());
  for (Eigen::Index i = 0; i < sf.values.size(); ++i)
    if (!std::isfinite(sf.values(i)) || sf.values(i) < 0.0)
      throw InvariantError("profile values must be finite and nonnegative");
  sf.tail_rate = fit_tail_rate(sf);

  Profile p;
  p.f = std::move(sf);
  p.kernel = kernel;
  p.mass = profile_mass(p.f);
  if (validate && p.mass > 0.0) {
    const Eigen::ArrayXd x2f = p.f.grid.nodes.square() * p.f.values;
    if (!(x2f(0) <= 1e-3 * x2f.maxCoeff()))
      throw InvariantError("x_min^2 f(x_min) exceeds 1e-3 sup x^2 f");
  }
  return p;
}

nlohmann::json solve_report_json(const KernelSpec& kernel, const Grid& grid,
                                 const SolveOptions& opts, const SolveReport& report,
                                 double mass) {
  nlohmann::json j;
  j["schema"] = 1;
  j["kernel"] = kernel_json(kernel);
  j["grid"] = grid_json(grid);
  j["options"] = {{"damping", opts.damping}, {"tol", opts.tol}, {"max_iter", opts.max_iter}};
  j["solve"] = {{"iterations", report.iterations},
                {"final_update", report.final_update},
                {"residual_sup", report.residual_sup},
                {"residual_l1", report.residual_l1},
                {"converged", report.converged},
                {"mass", mass}};
  return j;
}

AnalysisResult analyze_profile(const Profile& p) {
  AnalysisResult out;
  nlohmann::json& rep = out.report;
  rep["schema"] = 1;
  rep["kernel"] = kernel_json(p.kernel);
  rep["grid"] = grid_json(p.f.grid);
  rep["mass"] = p.mass;

  const PositivityScan scan = positivity_radius(p);
  rep["lemma_positivity"] = {{"x_tilde", scan.x_tilde}, {"degenerate", scan.degenerate}};
  if (scan.degenerate) out.flags.push_back("degenerate: profile has no positive tail");

  if (p.f.values.maxCoeff() == 0.0) {
    out.flags.push_back("degenerate: zero profile");
    return out;
  }

  try {
    auto [sup, l1] = residual(p);
    rep["eq1b"] = {{"residual_sup", sup}, {"residual_l1", l1}};
  } catch (const Error& e) {
    rep["eq1b"] = nullptr;
    out.flags.push_back(std::string("eq1b: ") + e.what());
  }

  double a_star = 0.0;
  bool have_astar = false;
  try {
    const AstarFit fit = estimate_astar(p);
    const double stability = astar_window_stability(p);
    a_star = fit.a_star;
    have_astar = a_star > 0.0;
    rep["theorem2"] = {{"a_star", fit.a_star},
                       {"fit_window", {fit.x_lo, fit.x_hi}},
                       {"fit_r2", fit.r2},
                       {"trusted", fit.trusted},
                       {"window_stability", stability}};
    if (!fit.trusted) out.flags.push_back("theorem2: a* fit_r2 below 0.999");
    if (stability > 0.01) out.flags.push_back("theorem2: a* window stability above 1%");
  } catch (const Error& e) {
    rep["theorem2"] = nullptr;
    out.flags.push_back(std::string("theorem2: ") + e.what());
  }

  try {
    const SandwichBounds b = fit_exponential_bounds(p, have_astar ? a_star : 1.0);
    rep["theorem1"]["sandwich"] = {{"C1", b.C1},         {"alpha1", b.alpha1},
                                   {"C2", b.C2},         {"alpha2", b.alpha2},
                                   {"delta", b.delta},   {"x_lo", b.x_lo},
                                   {"x_hi", b.x_hi},     {"holds", sandwich_holds(p, b)}};
  } catch (const Error& e) {
    rep["theorem1"]["sandwich"] = nullptr;
    out.flags.push_back(std::string("theorem1: ") + e.what());
  }

  try {
    const double margin = doubling_check(p);
    rep["lemma_doubling"] = {{"margin", margin}, {"constant", 10.0}};
    if (margin <= 0.0) out.flags.push_back("lemma_doubling: negative margin");
  } catch (const Error& e) {
    rep["lemma_doubling"] = nullptr;
    out.flags.push_back(std::string("lemma_doubling: ") + e.what());
  }

  try {
    const double delta = 0.5;
    const SampledFunction m = flatness_profile(p, delta);
    const SampledFunction a = slope_a(p);
    double gap = 0.0;
    const double x_mid = std::sqrt(m.grid.front() * m.grid.back());
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      if (m.grid.nodes(i) < x_mid) continue;
      gap = std::max(gap, m.values(i) - interp(a, m.grid.nodes(i)));
    }
    rep["lemma_flatness"] = {{"delta", delta}, {"gap_sup", gap}};
  } catch (const Error& e) {
    rep["lemma_flatness"] = nullptr;
    out.flags.push_back(std::string("lemma_flatness: ") + e.what());
  }

  double mu0 = 0.0;
  if (have_astar) {
    try {
      mu0 = mu_constant(p.kernel, a_star);
    } catch (const Error& e) {
      out.flags.push_back(std::string("theorem4: ") + e.what());
    }
  }

  if (have_astar) {
    try {
      const SampledFunction u = prefactor_u(p, a_star);
      const AstarFit fit = estimate_astar(p);
      double dev = 0.0;
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double x = u.grid.nodes(i);
        if (x < fit.x_lo || x > fit.x_hi) continue;
        dev = std::max(dev, std::fabs(u.values(i) - mu0));
      }
      rep["theorem4"] = {{"mu0", mu0}, {"u_sup_dev", dev}, {"mu0_valid", mu0 > 0.0}};

      // rescaled averages of u: the executable form of the nontrivial-limit
      // statement
      const double Amult = 2.0;
      std::vector<double> rl;
      const double r_lo = std::max(2.0 / a_star, 2.0);
      const double r_hi = u.grid.back() / Amult;
      if (r_hi > r_lo * 1.2) {
        for (int k = 0; k < 4; ++k)
          rl.push_back(r_lo * std::pow(r_hi / r_lo, k / 3.0));
        const auto avgs = prefactor_averages(u, Amult, rl);
        nlohmann::json ja = nlohmann::json::array();
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (auto& [R, avg] : avgs) {
          ja.push_back({R, avg});
          lo = std::min(lo, avg);
          hi = std::max(hi, avg);
        }
        rep["lemma_uupperbound"]["averages"] = ja;
        rep["lemma_uupperbound"]["A"] = Amult;
        rep["theorem3"] = {{"avg_lo", lo}, {"avg_hi", hi}, {"nontrivial", lo > 0.0}};
        if (!(lo > 0.0)) out.flags.push_back("theorem3: rescaled averages reach zero");
      }

      const LaplaceReport lap = laplace_report(u, p.kernel.alpha, a_star, mu0);
      rep["lemma_uupperbound"]["band_lo"] = lap.band_lo;
      rep["lemma_uupperbound"]["band_hi"] = lap.band_hi;
      rep["eq_vestimate"] = {{"V_bound", lap.V_bound}, {"alpha", lap.alpha}};
      rep["theorem4"]["nu_norm"] = lap.nu_norm;
      if (!(lap.band_lo >= 0.1 * lap.band_hi))
        out.flags.push_back("lemma_uupperbound: q U(q) band ratio below 0.1");
      for (std::size_t i = 0; i + 1 < lap.U_values.size(); ++i)
        if (lap.U_values[i + 1] > lap.U_values[i] * (1.0 + 1e-12)) {
          out.flags.push_back("transform_U: not monotone in q");
          break;
        }
    } catch (const Error& e) {
      out.flags.push_back(std::string("prefactor: ") + e.what());
    }

    try {
      // quadrature self-check of the limiting equation at the constant mu0
      const Grid mg = build_grid(1e-4, 24.0, 16);
      SampledFunction mu;
      mu.grid = mg;
      mu.values = Eigen::ArrayXd::Constant(mg.size(), mu0);
      mu.tail_rate = 0.0;
      const std::vector<double> pts = {1.0, 3.7, 10.0};
      rep["eq_muequation"] = {{"residual", mu_residual(mu, p.kernel, a_star, pts)},
                              {"test_points", pts}};
    } catch (const Error& e) {
      rep["eq_muequation"] = nullptr;
      out.flags.push_back(std::string("eq_muequation: ") + e.what());
    }
  }

  try {
    const std::vector<double> gammas = {1.0, 2.0, 3.0, 5.0, 10.0};
    const MomentReport m = moments(p, gammas);
    rep["eq_ublargex3"] = {{"gammas", m.gammas}, {"M", m.M_values}, {"A_fit", m.A_fit}};
    rep["lemma_negative_moment"] = {{"gamma", m.neg_moment_gamma}, {"value", m.neg_moment}};
    rep["lemma_dyadic"] = {{"sup", m.dyadic_sup}};
    for (std::size_t i = 0; i + 2 < m.M_values.size(); ++i) {
      // log-convexity on equally spaced triples only
      if (std::fabs((m.gammas[i] + m.gammas[i + 2]) / 2.0 - m.gammas[i + 1]) > 1e-12) continue;
      if (m.M_values[i + 1] * m.M_values[i + 1] >
          m.M_values[i] * m.M_values[i + 2] * (1.0 + 1e-10)) {
        out.flags.push_back("moments: log-convexity violated");
        break;
      }
    }
  } catch (const Error& e) {
    rep["eq_ublargex3"] = nullptr;
    out.flags.push_back(std::string("moments: ") + e.what());
  }

  try {
    const double b = std::min(10.0, p.f.grid.back() / 4.0);
    rep["lemma_bv"] = {{"interval", {1.0, b}}, {"tv_samples", tv_of_samples(p.f, 1.0, b)}};
  } catch (const Error& e) {
    rep["lemma_bv"] = nullptr;
    out.flags.push_back(std::string("lemma_bv: ") + e.what());
  }

  return out;
}

}  // namespace coagss
