#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "weakdep/errors.hpp"
#include "weakdep/processes.hpp"
#include "weakdep/variance.hpp"

using namespace weakdep;

namespace {

const InnovationLaw gauss{InnovationKind::standard_gaussian};

std::vector<double> random_alphas(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(1, 40);
  std::normal_distribution<double> z;
  std::vector<double> a(static_cast<std::size_t>(len(rng)));
  for (double& v : a) v = z(rng);
  return a;
}

}  // namespace

TEST_CASE("E S_n^2 agrees with the double sum and the autocovariance identity") {
  std::mt19937_64 rng(2024);
  for (int s = 0; s < 20; ++s) {
    const auto a = random_alphas(rng);
    const auto scheme = CoefficientScheme::from_list(a);
    const auto gamma = linear_autocovariance(a, a.size());
    for (int e = 4; e <= 12; ++e) {
      const int n = 1 << e;
      const double exact = exact_sum_variance_linear(scheme, n);
      CHECK(autocov_identity_sum_variance(gamma, n) == doctest::Approx(exact).epsilon(1e-10));
      if (e <= 8) {
        CHECK(oracle::brute_sum_variance(a, n) == doctest::Approx(exact).epsilon(1e-10));
        CHECK(oracle::weight_sum_variance(a, n) == doctest::Approx(exact).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("Beveridge-Nelson weights reproduce the partial sum") {
  const std::vector<double> a{0.3, -1.2, 0.7, 2.0, -0.4};
  const auto model = ProcessModel::linear(CoefficientScheme::from_list(a), gauss);
  const auto stream = model_stream(model, 5);
  for (std::int64_t n : {1, 3, 17}) {
    const auto w = bn_weights(a, n);
    for (std::uint64_t r = 0; r < 5; ++r) {
      double s = 0.0;
      for (double x : sample_path(model, stream, r, Series::base, static_cast<std::size_t>(n))) s += x;
      double t = 0.0;
      for (std::size_t i = 0; i < w.weights.size(); ++i) {
        t += w.weights[i] * stream.value(r, Series::base, w.first_time + static_cast<std::int64_t>(i));
      }
      CHECK(t == doctest::Approx(s).epsilon(1e-12));
    }
  }
}

TEST_CASE("infinite schemes") {
  const double rho = 0.8;
  const auto geo = CoefficientScheme::geometric(rho);
  for (int n : {10, 100, 1000}) {
    double direct = n / (1 - rho * rho);
    for (int k = 1; k < n; ++k) direct += 2.0 * (n - k) * std::pow(rho, k) / (1 - rho * rho);
    CHECK(exact_sum_variance_linear(geo, n) == doctest::Approx(direct).epsilon(1e-10));
  }
  const auto pl = CoefficientScheme::power_law(2.0);
  const auto t = autocovariance(ProcessModel::linear(pl, gauss), 16, AutocovMethod::exact_linear);
  REQUIRE(t.exact_longrun);
  CHECK(*t.exact_longrun == doctest::Approx(std::pow(pl.total(), 2)));
  CHECK(longrun_variance(t) == *t.exact_longrun);
  // slowly varying E S_n^2 / n approaches ss^2
  const double ratio = exact_sum_variance_linear(pl, 1 << 20) / (1 << 20) / *t.exact_longrun;
  CHECK(ratio == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("the cancellation scheme has degenerate long-run variance") {
  const auto d = CoefficientScheme::difference_power(0.25);
  const auto m = ProcessModel::linear(d, gauss);
  CHECK_THROWS_AS(longrun_variance(autocovariance(m, 32, AutocovMethod::exact_linear)), DegenerateVarianceError);
  const double a = exact_sum_variance_linear(d, 1 << 10), b = exact_sum_variance_linear(d, 1 << 16);
  CHECK(std::log(b / a) / std::log(64.0) == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("sigma_hat_m identity") {
  const auto m = ProcessModel::linear(CoefficientScheme::geometric(0.6), gauss);
  for (std::size_t mm : {1u, 4u, 33u}) {
    const auto t = autocovariance(m_project(m, mm), mm, AutocovMethod::exact_linear);
    const auto s = sigma_hat_m(t, mm);
    CHECK(s.residual < 1e-12);
    double direct = 0.0;
    for (std::size_t k = 1; k <= mm; ++k)
      for (std::size_t l = 1; l <= mm; ++l) direct += t.gamma[k > l ? k - l : l - k];
    CHECK(s.value == doctest::Approx(direct / (2.0 * mm)));
  }
  const auto t = autocovariance(m, 3, AutocovMethod::exact_linear);
  CHECK_THROWS_AS(sigma_hat_m(t, 8), PreconditionError);
}

TEST_CASE("doubling map autocovariances") {
  const auto c = autocovariance(ProcessModel::doubling(DoublingFn::cos2pi), 6, AutocovMethod::exact_doubling);
  CHECK(c.gamma[0] == doctest::Approx(0.5).epsilon(1e-12));
  for (std::size_t k = 1; k <= 6; ++k) CHECK(std::fabs(c.gamma[k]) < 1e-12);
  CHECK(longrun_variance(c) == doctest::Approx(0.5).epsilon(1e-10));
  const auto x = autocovariance(ProcessModel::doubling(DoublingFn::centered_x), 6, AutocovMethod::exact_doubling);
  for (std::size_t k = 0; k <= 6; ++k) CHECK(x.gamma[k] == doctest::Approx(std::ldexp(1.0, -static_cast<int>(k)) / 12.0).epsilon(1e-10));
  const auto mc = autocovariance(ProcessModel::doubling(DoublingFn::centered_x), 6, AutocovMethod::monte_carlo, 40000, 3);
  for (std::size_t k = 0; k <= 6; ++k) CHECK(std::fabs(mc.gamma[k] - x.gamma[k]) < 4.0 * mc.stderr_[k]);
  CHECK_THROWS_AS(autocovariance(ProcessModel::doubling(DoublingFn::cos2pi), 21, AutocovMethod::exact_doubling),
                  PreconditionError);
}

TEST_CASE("variance report") {
  const auto m = ProcessModel::linear(CoefficientScheme::geometric(0.5), gauss);
  const auto r = variance_report(m, 256, 8, 32, 0, 0);
  CHECK(r.ss2 == doctest::Approx(4.0));
  CHECK(r.s_n2 * 256 == doctest::Approx(exact_sum_variance_linear(CoefficientScheme::geometric(0.5), 256)));
  CHECK(r.sigma_hat_m2 > 0.0);
  const auto d = variance_report(ProcessModel::doubling(DoublingFn::cos2pi), 64, 0, 8, 0, 0);
  CHECK(d.ss2 == doctest::Approx(0.5));
  CHECK(d.s_n2 == doctest::Approx(0.5));
}
