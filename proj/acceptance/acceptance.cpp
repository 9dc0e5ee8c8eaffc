// Acceptance checks: one PASS/FAIL line per criterion. Optional arguments select criteria by number.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "../tests/oracles.hpp"
#include "weakdep/bedistance.hpp"
#include "weakdep/blocks.hpp"
#include "weakdep/cli.hpp"
#include "weakdep/dependence.hpp"
#include "weakdep/errors.hpp"
#include "weakdep/processes.hpp"
#include "weakdep/rates.hpp"
#include "weakdep/variance.hpp"

using namespace weakdep;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Ordinary least squares slope of log y on log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

std::string fit_text(const RateFit& f) {
  return fmt("slope %.3f", f.slope) + fmt(" [%.3f,", f.ci_low) + fmt(" %.3f]", f.ci_high) + " from " +
         std::to_string(f.n.size()) + " points";
}

const InnovationLaw gauss{InnovationKind::standard_gaussian};
const InnovationLaw rademacher{InnovationKind::rademacher};

Outcome gaussian_exactness() {
  const auto model = ProcessModel::linear(CoefficientScheme::identity(), gauss);
  double worst = 0.0;
  for (std::int64_t n : dyadic_n_grid(0, 20)) {
    worst = std::max(worst, exact_delta_gaussian_linear(model, n, Normalization::sqrt_n_ss2).delta);
  }
  int within = 0;
  for (std::uint64_t s = 1; s <= 100; ++s) {
    EmpiricalOptions o;
    o.R = 10000;
    o.seed = s;
    const std::int64_t n = std::int64_t{1} << (4 + s % 7);
    const auto e = empirical_delta(model, n, Normalization::sqrt_n_ss2, o);
    if (e.delta <= e.dkw) ++within;
  }
  return {worst == 0.0 && within >= 99, fmt("closed-form max %.1e over n = 2^0..2^20", worst) + "; " +
                                            std::to_string(within) + "/100 seeds within DKW (need >= 99)"};
}

Outcome variance_identity() {
  std::mt19937_64 rng(551);
  std::uniform_int_distribution<int> len(1, 64);
  std::normal_distribution<double> z;
  double worst_id = 0.0, worst_brute = 0.0;
  for (int s = 0; s < 20; ++s) {
    std::vector<double> a(static_cast<std::size_t>(len(rng)));
    for (double& v : a) v = z(rng);
    const auto scheme = CoefficientScheme::from_list(a);
    const auto gamma = linear_autocovariance(a, a.size());
    for (std::int64_t n : dyadic_n_grid(4, 12)) {
      const double exact = exact_sum_variance_linear(scheme, n);
      worst_id = std::max(worst_id, std::fabs(autocov_identity_sum_variance(gamma, n) - exact) / exact);
      if (n <= 256) {
        worst_brute = std::max(worst_brute,
                               std::fabs(oracle::brute_sum_variance(a, static_cast<int>(n)) - exact) / exact);
      }
    }
  }
  return {worst_id < 1e-10 && worst_brute < 1e-10,
          fmt("max rel error vs identity %.1e", worst_id) + fmt(", vs double sum %.1e (tol 1e-10)", worst_brute)};
}

Outcome lower_bound_rate() {
  const auto scheme = CoefficientScheme::power_law(1.3);
  std::vector<BEEstimate> est;
  double esn2_worst = 0.0;
  for (std::int64_t n : dyadic_n_grid(8, 18)) {
    est.push_back(exact_delta_gaussian_linear(scheme, n, Normalization::sqrt_n_ss2));
    esn2_worst = std::max(esn2_worst, exact_delta_gaussian_linear(scheme, n, Normalization::sqrt_ESn2).delta);
  }
  const auto f = fit_rate(est);
  return {std::fabs(f.slope + 0.3) <= 0.05 && esn2_worst == 0.0,
          fit_text(f) + " (target -0.3 +- 0.05)" + fmt("; sqrt-ESn2 max Delta %.1e", esn2_worst)};
}

Outcome upper_bound_rate() {
  const auto model = ProcessModel::linear(CoefficientScheme::identity(), rademacher);
  RateOptions o;
  o.R = 100000;
  o.seed = 4;
  const auto est = run_rate_experiment(model, dyadic_n_grid(6, 14), Normalization::sqrt_n_ss2, o);
  int agree = 0;
  std::vector<double> ns, exact;
  for (const auto& e : est) {
    const double ref = oracle::rademacher_delta(static_cast<int>(e.n));
    ns.push_back(static_cast<double>(e.n));
    exact.push_back(ref);
    if (std::fabs(e.delta - ref) <= e.dkw) ++agree;
  }
  const auto f = fit_rate(est);
  const bool ok = std::fabs(f.slope + 0.5) <= 0.1 && agree == static_cast<int>(est.size());
  return {ok, fit_text(f) + " (target -0.5 +- 0.1); " + std::to_string(agree) + "/" + std::to_string(est.size()) +
                  " points within DKW of the binomial values" + fmt(" (binomial slope %.3f)", loglog_slope(ns, exact))};
}

Outcome doubling_map() {
  const auto cfg = parse_config(find_preset("doubling-cos").config);
  const auto model = build_model(cfg.model, cfg.seed);
  const double ss2 = longrun_variance(autocovariance(model, 20, AutocovMethod::exact_doubling));
  RateOptions o;
  o.R = 100000;
  o.seed = cfg.seed;
  const auto est = run_rate_experiment(model, dyadic_n_grid(6, 14), Normalization::sqrt_n_ss2, o);
  const auto f = fit_rate(est);
  int bounded = 0;
  for (std::size_t k = 1; k <= 12; ++k) {
    const auto t = theta_mc(model, k, 2.0, 10000, cfg.seed);
    if (t.theta_star <= 2.0 * M_PI * std::ldexp(1.0, -static_cast<int>(k)) + 3.0 * t.se_star) ++bounded;
  }
  const bool ok = std::fabs(ss2 - 0.5) < 1e-12 && std::fabs(f.slope + 0.5) <= 0.15 && bounded == 12;
  return {ok, fmt("ss^2 = %.15f; ", ss2) + fit_text(f) + " (target -0.5 +- 0.15); theta*_k within bound for " +
                  std::to_string(bounded) + "/12 lags"};
}

Outcome dependence_closed_forms() {
  struct Case {
    CoefficientScheme scheme;
    InnovationLaw law;
    std::size_t depth;
  };
  const std::vector<Case> cases = {
      {CoefficientScheme::geometric(0.5), gauss, 100},
      {CoefficientScheme::geometric(0.9), rademacher, 400},
      {CoefficientScheme::power_law(1.5), rademacher, 4096},
      {CoefficientScheme::power_law(2.0), gauss, 2048},
      {CoefficientScheme::from_list({1.0, -0.8, 0.5, 0.3, -0.2, 0.1, 0.05}), gauss, 0},
  };
  int checks = 0, hits = 0;
  double worst = 0.0;
  std::uint64_t seed = 60;
  for (const auto& c : cases) {
    const auto model = ProcessModel::linear(c.scheme, c.law, c.depth);
    for (std::size_t l : dyadic_grid(6)) {
      const auto t = theta_mc(model, l, 2.0, 10000, ++seed);
      const double prime = std::sqrt(2.0) * std::fabs(c.scheme.coefficient(static_cast<std::int64_t>(l)));
      const double star = std::sqrt(2.0) * std::sqrt(c.scheme.tail_square_sum(l));
      const double zp = std::fabs(t.theta_prime - prime) / std::max(t.se_prime, 1e-300);
      const double zs = std::fabs(t.theta_star - star) / std::max(t.se_star, 1e-300);
      const bool okp = std::fabs(t.theta_prime - prime) <= 3.0 * t.se_prime;
      const bool oks = std::fabs(t.theta_star - star) <= 3.0 * t.se_star;
      if (okp) ++hits;
      if (oks) ++hits;
      checks += 2;
      if (t.se_prime > 0) worst = std::max(worst, zp);
      if (t.se_star > 0) worst = std::max(worst, zs);
    }
  }
  return {hits == checks, std::to_string(hits) + "/" + std::to_string(checks) +
                              " estimates within 3 stderr of the closed forms" + fmt(" (largest |z| %.2f)", worst)};
}

Outcome cancellation() {
  const auto cfg = parse_config(find_preset("cancellation-beta-0.25").config);
  const auto model = build_model(cfg.model, cfg.seed);
  const auto& scheme = model.as_linear().scheme;
  std::vector<double> ns, es;
  for (std::int64_t n : dyadic_n_grid(6, 20)) {
    ns.push_back(static_cast<double>(n));
    es.push_back(exact_sum_variance_linear(scheme, n));
  }
  const double growth = loglog_slope(ns, es);
  bool degenerate = false;
  try {
    longrun_variance(autocovariance(model, 64, AutocovMethod::exact_linear));
  } catch (const DegenerateVarianceError&) {
    degenerate = true;
  }
  double gauss_worst = 0.0;
  for (std::int64_t n : dyadic_n_grid(6, 14)) {
    gauss_worst = std::max(gauss_worst, exact_delta_gaussian_linear(scheme, n, Normalization::sqrt_ESn2).delta);
  }
  RateOptions o;
  o.R = 100000;
  o.seed = cfg.seed;
  const auto est = run_rate_experiment(model, dyadic_n_grid(6, 14), Normalization::sqrt_ESn2, o);
  std::string mc;
  bool mc_ok = false;
  try {
    const auto f = fit_rate(est);
    mc = fit_text(f);
    mc_ok = std::fabs(f.slope + 0.5) <= 0.15;
  } catch (const PreconditionError& e) {
    mc = std::string("no fit: ") + e.what();
  }
  int censored = 0;
  for (const auto& e : est) censored += e.censored() ? 1 : 0;
  const bool ok = std::fabs(growth - 0.5) <= 0.05 && degenerate && gauss_worst == 0.0 && mc_ok;
  return {ok, fmt("E S_n^2 exponent %.4f (target 0.5 +- 0.05); ", growth) +
                  (degenerate ? "longrun degenerate error raised" : "longrun did not raise") +
                  fmt("; Gaussian sqrt-ESn2 max Delta %.1e; Rademacher MC ", gauss_worst) + mc + " (target -0.5 +- 0.15, " +
                  std::to_string(censored) + "/" + std::to_string(est.size()) + " points below DKW)"};
}

Outcome blocks() {
  const auto model = ProcessModel::linear(CoefficientScheme::geometric(0.5), gauss, 256);
  struct Shape {
    std::int64_t N, m, mp;
  };
  const std::vector<Shape> shapes = {{2, 4, 4},  {3, 5, 3},   {4, 8, 8},   {5, 7, 4},   {8, 16, 9},
                                     {6, 3, 2},  {10, 32, 20}, {16, 12, 12}, {32, 16, 16}, {12, 64, 40}};
  double worst = 0.0;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto& s = shapes[i];
    const auto layout = make_layout(2 * (s.N - 1) * s.m + s.mp, s.m);
    worst = std::max(worst, conditional_variances(model, layout, i).residual);
  }
  std::vector<double> ms, gaps;
  for (std::int64_t m : dyadic_n_grid(4, 10)) {
    const auto layout = make_layout(2 * 31 * m + m, m);
    const auto d = conditional_variances(model, layout, 0);
    ms.push_back(static_cast<double>(m));
    gaps.push_back(std::fabs(d.sigma2_j[layout.N / 2] - projected_sigma_hat(model, m).value));
  }
  const double slope = loglog_slope(ms, gaps);
  const double degenerate = degeneracy_probability(model, make_layout(2 * 31 * 16 + 16, 16), 10000);
  const bool ok = worst < 1e-10 && slope <= -0.4 && degenerate == 0.0;
  return {ok, fmt("max residual %.1e on 10 layouts (tol 1e-10); ", worst) +
                  fmt("sigma gap slope %.3f (need <= -0.4); ", slope) +
                  fmt("degeneracy frequency %g at N = 32", degenerate)};
}

Outcome gl_walk() {
  const auto cfg = parse_config(find_preset("gl2-walk").config);
  const auto model = build_model(cfg.model, cfg.seed);
  const double ss2 = longrun_variance(autocovariance(model, 512, AutocovMethod::exact_gl2));
  std::vector<SurrogateEstimate> s;
  for (std::size_t k = 1; k <= 20; ++k) s.push_back(theta_gl_surrogate(model, k, 2.0, 40000, cfg.seed));
  int monotone = 0;
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (s[k].value <= s[k - 1].value + 3.0 * std::hypot(s[k].stderr_, s[k - 1].stderr_)) ++monotone;
  }
  const double gap = s.front().value - s.back().value;
  const double band = 3.0 * (s.front().stderr_ + s.back().stderr_);
  RateOptions o;
  o.R = 10000;
  o.seed = cfg.seed;
  const auto est = run_rate_experiment(model, dyadic_n_grid(6, 12), Normalization::sqrt_n_ss2, o);
  const auto f = fit_rate(est);
  const bool ok = ss2 > 0.0 && monotone == 19 && gap > band && s.back().value < s.front().value &&
                  f.slope >= -0.7 && f.slope <= -0.3;
  return {ok, fmt("ss^2 = %.6f; ", ss2) + fmt("surrogate k=1 %.5f", s.front().value) +
                  fmt(" k=20 %.5f", s.back().value) + fmt(", gap %.5f", gap) + fmt(" vs 3 stderr %.5f", band) + ", " +
                  std::to_string(monotone) + "/19 steps non-increasing within noise; " + fit_text(f) +
                  " (need [-0.7, -0.3])"};
}

Outcome boundary_table() {
  bool decreasing = true;
  double prev = boundary_B(3.0);
  for (double p = 3.25; p <= 1000.0; p += 0.25) {
    const double b = boundary_B(p);
    if (!(b < prev && b > 0.5)) decreasing = false;
    prev = b;
  }
  const bool ok = boundary_B(3.0) == 2.0 / 3.0 && boundary_B(4.0) == 5.0 / 8.0 && decreasing &&
                  std::fabs(boundary_B(1e12) - 0.5) < 1e-11;
  return {ok, fmt("B(3) = %.17g, ", boundary_B(3.0)) + fmt("B(4) = %.17g, ", boundary_B(4.0)) +
                  (decreasing ? "strictly decreasing" : "not decreasing") + fmt(" on [3, 1000], B(1e12) = %.12f", boundary_B(1e12))};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gaussian exactness", gaussian_exactness},
      {"variance identity", variance_identity},
      {"lower-bound rate", lower_bound_rate},
      {"upper-bound rate", upper_bound_rate},
      {"doubling map", doubling_map},
      {"dependence closed forms", dependence_closed_forms},
      {"cancellation scheme", cancellation},
      {"blocks", blocks},
      {"GL_2 walk", gl_walk},
      {"B(p) table", boundary_table},
  };
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!pick.empty() && !pick.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d %s: %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
