#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "weakdep/errors.hpp"
#include "weakdep/rates.hpp"

using namespace weakdep;

namespace {

BEEstimate point(std::int64_t n, double delta, double half, double dkw = 0.0) {
  BEEstimate e;
  e.n = n;
  e.delta = delta;
  e.low = std::max(0.0, delta - half);
  e.high = delta + half;
  e.dkw = dkw;
  return e;
}

}  // namespace

TEST_CASE("dyadic grids") {
  CHECK(dyadic_n_grid(6, 9) == std::vector<std::int64_t>{64, 128, 256, 512});
  CHECK_THROWS_AS(dyadic_n_grid(5, 4), PreconditionError);
  for (auto m : {RateMethod::automatic, RateMethod::empirical, RateMethod::gaussian_closed_form})
    CHECK(rate_method_from_string(to_string(m)) == m);
}

TEST_CASE("exact power laws are recovered") {
  for (double slope : {-0.3, -0.5, -1.0}) {
    std::vector<BEEstimate> est;
    for (auto n : dyadic_n_grid(4, 12)) {
      auto e = point(n, 0.7 * std::pow(static_cast<double>(n), slope), 0.0);
      e.method = DeltaMethod::gaussian_closed_form;
      est.push_back(e);
    }
    const auto fit = fit_rate(est);
    CHECK(fit.slope == doctest::Approx(slope).epsilon(1e-10));
    CHECK(fit.intercept == doctest::Approx(std::log(0.7)).epsilon(1e-10));
    CHECK(fit.r_squared == doctest::Approx(1.0));
    CHECK(fit.weighting == "uniform");
  }
}

TEST_CASE("confidence intervals cover the true slope") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> z;
  int covered = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    std::vector<BEEstimate> est;
    for (auto n : dyadic_n_grid(6, 14)) {
      const double truth = 0.4 / std::sqrt(static_cast<double>(n));
      const double rel = 0.1;
      const double d = truth * std::exp(rel * z(rng));
      est.push_back(point(n, d, 2.0 * rel * d));
    }
    const auto fit = fit_rate(est);
    CHECK(fit.weighting == "inverse-relative-band");
    covered += fit.ci_low <= -0.5 && -0.5 <= fit.ci_high;
  }
  CHECK(covered >= 0.9 * trials);
}

TEST_CASE("censored and zero points are excluded") {
  std::vector<BEEstimate> est;
  for (auto n : dyadic_n_grid(6, 13)) est.push_back(point(n, 1.0 / std::sqrt(static_cast<double>(n)), 0.01, 0.02));
  est.push_back(point(1 << 14, 0.0, 0.0));
  const auto fit = fit_rate(est);
  CHECK(fit.excluded == std::vector<std::int64_t>{4096, 8192, 16384});
  CHECK(fit.n.size() == 6);
  CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-10));
  est.resize(3);
  CHECK_THROWS_AS(fit_rate(est), PreconditionError);
}

TEST_CASE("rate experiments") {
  const auto model = ProcessModel::linear(CoefficientScheme::power_law(1.3), {InnovationKind::standard_gaussian});
  const auto grid = dyadic_n_grid(8, 14);
  const auto est = run_rate_experiment(model, grid, Normalization::sqrt_n_ss2);
  for (const auto& e : est) CHECK(e.method == DeltaMethod::gaussian_closed_form);
  CHECK(fit_rate(est).slope == doctest::Approx(-0.3).epsilon(0.05 / 0.3));
  for (const auto& e : run_rate_experiment(model, grid, Normalization::sqrt_ESn2)) CHECK(e.delta == 0.0);

  const auto rad = ProcessModel::linear(CoefficientScheme::identity(), {InnovationKind::rademacher});
  RateOptions opt;
  opt.R = 2000;
  opt.rep_offset = 500;
  const auto mc = run_rate_experiment(rad, dyadic_n_grid(4, 7), Normalization::sqrt_n_ss2, opt);
  for (std::size_t g = 0; g < mc.size(); ++g) {
    CHECK(mc[g].method == DeltaMethod::empirical);
    CHECK(mc[g].rep_begin == 500 + g * 2000);
  }
  CHECK_THROWS_AS(run_rate_experiment(rad, {16, 32, 48, 64}, Normalization::sqrt_n_ss2, opt), PreconditionError);
  CHECK_THROWS_AS(run_rate_experiment(rad, {16, 32, 64}, Normalization::sqrt_n_ss2, opt), PreconditionError);
  opt.method = RateMethod::gaussian_closed_form;
  CHECK_THROWS_AS(run_rate_experiment(rad, dyadic_n_grid(4, 7), Normalization::sqrt_n_ss2, opt), UnsupportedError);
}
