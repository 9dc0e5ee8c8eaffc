#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "weakdep/errors.hpp"
#include "weakdep/glwalk.hpp"
#include "weakdep/processes.hpp"
#include "weakdep/variance.hpp"

using namespace weakdep;

namespace {

// E log-gain for a uniform direction, midpoint rule in both variables.
double uniform_direction_mean(double lmax) {
  const int A = 2000, L = 400;
  double acc = 0.0;
  for (int i = 0; i < A; ++i) {
    const double th = (i + 0.5) * std::numbers::pi / A;
    for (int q = 0; q < L; ++q) {
      const double lam = lmax * (2.0 * (q + 0.5) / L - 1.0);
      const double a = std::exp(lam) * std::cos(th), b = std::exp(-lam) * std::sin(th);
      acc += 0.5 * std::log(a * a + b * b);
    }
  }
  return acc / (A * L);
}

}  // namespace

TEST_CASE("uniform rotations make the gains independent") {
  const auto m = ProcessModel::gl_walk(2, 1.0, std::numbers::pi);
  const ProjectiveChain2 chain(m.as_gl());
  REQUIRE(chain.converged());
  for (double v : chain.stationary()) CHECK(v == doctest::Approx(1.0 / 2048).epsilon(1e-9));
  CHECK(chain.stationary_mean() == doctest::Approx(uniform_direction_mean(1.0)).epsilon(1e-5));
  const auto g = chain.autocovariance(5);
  CHECK(g[0] > 0.1);
  for (std::size_t k = 1; k <= 5; ++k) CHECK(std::fabs(g[k]) < 1e-12);
  CHECK(chain.longrun_variance() == doctest::Approx(g[0]).epsilon(1e-10));
}

TEST_CASE("no stretching gives zero gains") {
  const ProjectiveChain2 chain(ProcessModel::gl_walk(2, 0.0, 0.5).as_gl());
  CHECK(std::fabs(chain.stationary_mean()) < 1e-15);
  CHECK(std::fabs(chain.autocovariance(3)[0]) < 1e-15);
}

TEST_CASE("step means start at E lambda and settle on the stationary mean") {
  const auto m = ProcessModel::gl_walk(2, 1.0, 0.1);
  const ProjectiveChain2 chain(m.as_gl());
  const std::size_t B = chain.mixing_steps();
  CHECK(B > 10);
  CHECK(B < 2000);
  const auto means = chain.step_means(B + 5);
  CHECK(std::fabs(means[0]) < 1e-15);
  CHECK(means.back() == doctest::Approx(chain.stationary_mean()).epsilon(1e-9));
  CHECK(chain.stationary_mean() == doctest::Approx(0.0904967).epsilon(2e-5));
  CHECK(chain.longrun_variance() == doctest::Approx(0.127921).epsilon(2e-5));
}

TEST_CASE("chain moments agree with simulated walks") {
  const auto m = ProcessModel::gl_walk(2, 1.0, 0.1);
  const ProjectiveChain2 chain(m.as_gl());
  const auto s = model_stream(m, 77);
  const int R = 2000, burn = 300, len = 1000;
  double sum_mean = 0.0, sq_mean = 0.0, sum_var = 0.0, sum_s2 = 0.0, sq_s2 = 0.0;
  for (int r = 0; r < R; ++r) {
    const auto x = gl_log_gains(m.as_gl(), s, r, burn + len, {1.0, 0.0});
    double mean = 0.0, v = 0.0;
    for (int k = burn; k < burn + len; ++k) mean += x[k];
    mean /= len;
    for (int k = burn; k < burn + len; ++k) v += (x[k] - chain.stationary_mean()) * (x[k] - chain.stationary_mean());
    sum_mean += mean;
    sq_mean += mean * mean;
    sum_var += v / len;
    const double s2 = len * (mean - chain.stationary_mean()) * (mean - chain.stationary_mean());
    sum_s2 += s2;
    sq_s2 += s2 * s2;
  }
  const double mu = sum_mean / R;
  const double se = std::sqrt((sq_mean / R - mu * mu) / R);
  CHECK(std::fabs(mu - chain.stationary_mean()) < 4.0 * se);
  CHECK(sum_var / R == doctest::Approx(chain.autocovariance(0)[0]).epsilon(0.01));
  const double s2 = sum_s2 / R;
  const double s2_se = std::sqrt((sq_s2 / R - s2 * s2) / R);
  CHECK(std::fabs(s2 - chain.longrun_variance()) < 4.0 * s2_se + 0.02 * chain.longrun_variance());
}

TEST_CASE("centering and variance use the chain for d = 2") {
  const auto m = center_model(ProcessModel::gl_walk(2, 1.0, 0.1), 1, 2);
  const auto& g = m.as_gl();
  const ProjectiveChain2 chain(g);
  CHECK(g.stationary_mean == doctest::Approx(chain.stationary_mean()).epsilon(1e-15));
  CHECK(g.step_means.size() == chain.mixing_steps());
  const auto t = autocovariance(m, 8, AutocovMethod::exact_gl2);
  REQUIRE(t.exact_longrun);
  CHECK(*t.exact_longrun == doctest::Approx(chain.longrun_variance()));
  const auto rep = variance_report(m, 1024, 0, 64, 100, 1);
  CHECK(rep.ss2 == doctest::Approx(chain.longrun_variance()));
  CHECK_THROWS_AS(autocovariance(ProcessModel::doubling(DoublingFn::cos2pi), 4, AutocovMethod::exact_gl2),
                  PreconditionError);
  CHECK_THROWS_AS(ProjectiveChain2(ProcessModel::gl_walk(3, 1.0, 0.1).as_gl()), UnsupportedError);
}
