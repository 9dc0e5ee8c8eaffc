#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "weakdep/coefficients.hpp"
#include "weakdep/errors.hpp"
#include "weakdep/processes.hpp"

using namespace weakdep;

namespace {
const InnovationLaw gauss{InnovationKind::standard_gaussian};
const InnovationLaw rad{InnovationKind::rademacher};
}  // namespace

TEST_CASE("coefficient schemes against reference sums") {
  const auto pl = CoefficientScheme::power_law(1.3);
  CHECK(pl.coefficient(0) == 0.0);
  CHECK(pl.coefficient(4) == doctest::Approx(std::pow(4.0, -1.3)));
  CHECK(pl.total() == doctest::Approx(oracle::zeta_1_3).epsilon(1e-10));
  CHECK(power_tail(1.5, 10.0) == doctest::Approx(oracle::hurwitz_1_5_10).epsilon(1e-10));
  CHECK(std::isinf(CoefficientScheme::power_law(0.9).total()));

  const auto geo = CoefficientScheme::geometric(0.6);
  CHECK(geo.total() == doctest::Approx(2.5));
  CHECK(geo.tail_square_sum(3) == doctest::Approx(std::pow(0.36, 3) / 0.64));

  for (double s : {1.1, 1.5, 2.5}) {
    double direct = 0.0;
    for (int j = 3; j <= 200000; ++j) direct += std::pow(j, -s);
    CHECK(power_sum(s, 3, 200000) == doctest::Approx(direct).epsilon(1e-12));
    double shifted = 0.0;
    for (int i = 0; i < 5000; ++i) shifted += std::pow(2.5 + i, -s);
    CHECK(shifted_power_sum(s, 2.5, 5000) == doctest::Approx(shifted).epsilon(1e-12));
  }
}

TEST_CASE("difference schemes telescope") {
  const auto d = CoefficientScheme::difference_power(0.25);
  double acc = 0.0;
  for (int t = 0; t <= 500; ++t) {
    acc += d.coefficient(t);
    if (t >= 1) CHECK(d.partial_sum(t) == doctest::Approx(std::pow(t, -0.25)).epsilon(1e-12));
    CHECK(d.partial_sum(t) == doctest::Approx(acc).epsilon(1e-12));
  }
  CHECK(d.total() == 0.0);
  const auto l = CoefficientScheme::difference_log();
  CHECK(l.partial_sum(9) == doctest::Approx(1.0 / std::log(10.0)).epsilon(1e-12));
  CHECK_THROWS_AS(CoefficientScheme::difference_power(0.6), PreconditionError);
  CHECK_THROWS_AS(CoefficientScheme::power_law(0.3), PreconditionError);
}

TEST_CASE("truncation depth meets its tolerance") {
  for (const auto& s : {CoefficientScheme::power_law(1.3), CoefficientScheme::geometric(0.9),
                        CoefficientScheme::difference_power(0.25)}) {
    const std::size_t J = s.depth_for(1e-3);
    CHECK(std::sqrt(s.tail_square_sum(J)) <= 1e-3);
    CHECK(std::sqrt(s.tail_square_sum(J - 1)) > 1e-3);
    const auto m = ProcessModel::linear(s, gauss);
    CHECK(m.as_linear().depth == J);
    CHECK(truncation_error(m, J) <= 1e-3);
  }
}

TEST_CASE("linear paths are the filter applied to the innovation stream") {
  const auto m = ProcessModel::linear(CoefficientScheme::from_list({0.5, -1.0, 0.25, 2.0}), rad);
  const auto path = sample_path(m, 17, 3, 50);
  const auto s = model_stream(m, 17);
  for (std::int64_t k = 1; k <= 50; ++k) {
    const double direct = 0.5 * s.value(3, Series::base, k) - s.value(3, Series::base, k - 1) +
                          0.25 * s.value(3, Series::base, k - 2) + 2.0 * s.value(3, Series::base, k - 3);
    CHECK(path[k - 1] == doctest::Approx(direct).epsilon(1e-14));
    CHECK(m.evaluate(draw_window(s, 3, Series::base, k, 4)) == doctest::Approx(direct).epsilon(1e-14));
  }
  CHECK_THROWS_AS(m.evaluate(draw_window(s, 3, Series::base, 5, 3)), PreconditionError);
  const auto wrong = CoupledStream(17, gauss);
  CHECK_THROWS_AS(m.evaluate(draw_window(wrong, 3, Series::base, 5, 4)), PreconditionError);
}

TEST_CASE("m-projection keeps the first m coefficients") {
  const auto m = ProcessModel::linear(CoefficientScheme::geometric(0.5), gauss);
  const auto p = m_project(m, 3);
  const auto s = model_stream(m, 1);
  const auto w = draw_window(s, 0, Series::base, 10, m.required_depth());
  const double expect = w[0] + 0.5 * w[1] + 0.25 * w[2];
  CHECK(p.evaluate(w) == doctest::Approx(expect).epsilon(1e-14));
  CHECK_THROWS_AS(m_project(m, 0), PreconditionError);
  CHECK_THROWS_AS(m_project(ProcessModel::gl_walk(2, 1.0, 0.5), 4), UnsupportedError);
}

TEST_CASE("doubling paths follow the map backward in time") {
  const auto m = ProcessModel::doubling(DoublingFn::centered_x);
  const auto path = sample_path(m, 4, 0, 400);
  for (std::size_t k = 1; k < path.size(); ++k) {
    const double x = path[k] + 0.5;
    const double prev = 2.0 * x - std::floor(2.0 * x) - 0.5;
    CHECK(path[k - 1] == doctest::Approx(prev).epsilon(1e-12));
  }
  CHECK(doubling_observable(DoublingFn::cos2pi, 0.25) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(doubling_observable(DoublingFn::indicator_half, 0.7) == -0.5);
  CHECK(doubling_observable(DoublingFn::indicator_half, 0.2) == 0.5);
  CHECK_THROWS_AS(ProcessModel::doubling(DoublingFn::cos2pi, 65), PreconditionError);
}

TEST_CASE("centered models have mean zero") {
  const auto h = center_model(
      ProcessModel::holder_of_linear(CoefficientScheme::geometric(0.5), gauss, HolderFn::cos_shift), 3);
  const auto d = ProcessModel::doubling(DoublingFn::cos2pi);
  for (const auto& m : {h, d}) {
    const auto s = model_stream(m, 8);
    const int R = 40000;
    double sum = 0.0, sq = 0.0;
    for (int r = 0; r < R; ++r) {
      const double x = sample_path(m, s, r, Series::base, 1)[0];
      sum += x;
      sq += x * x;
    }
    const double mean = sum / R;
    CHECK(std::fabs(mean) < 5.0 * std::sqrt(sq / R / R));
  }
}

TEST_CASE("GL walk log gains") {
  const auto m = ProcessModel::gl_walk(2, 0.7, 0.3);
  const auto& g = m.as_gl();
  const auto s = model_stream(m, 2);
  // from e1 the first gain is lambda_1 itself
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto x = gl_log_gains(g, s, r, 1, {1.0, 0.0});
    const double lam = 0.7 * (2.0 * s.child(1).uniform(r, Series::base, 1) - 1.0);
    CHECK(x[0] == doctest::Approx(lam).epsilon(1e-14));
  }
  // no stretching: every gain vanishes
  const auto flat = ProcessModel::gl_walk(3, 0.0, 1.0);
  for (double x : gl_log_gains(flat.as_gl(), s, 0, 30, {0.0, 0.6, 0.8})) CHECK(std::fabs(x) < 1e-14);
  // norm of the product equals the sum of gains, checked on 2x2 matrices directly
  const auto x = gl_log_gains(g, s, 5, 40, {1.0, 0.0});
  double v0 = 1.0, v1 = 0.0, logn = 0.0;
  for (int k = 1; k <= 40; ++k) {
    const double lam = 0.7 * (2.0 * s.child(1).uniform(5, Series::base, k) - 1.0);
    const double phi = 0.3 * (2.0 * s.child(2).uniform(5, Series::base, k) - 1.0);
    const double a = std::exp(lam) * v0, b = std::exp(-lam) * v1;
    v0 = std::cos(phi) * a - std::sin(phi) * b;
    v1 = std::sin(phi) * a + std::cos(phi) * b;
    const double nrm = std::hypot(v0, v1);
    logn += std::log(nrm);
    v0 /= nrm;
    v1 /= nrm;
  }
  double total = 0.0;
  for (double v : x) total += v;
  CHECK(total == doctest::Approx(logn).epsilon(1e-12));
  CHECK_THROWS_AS(ProcessModel::gl_walk(2, 1.0, 4.0), PreconditionError);
  CHECK_THROWS_AS(ProcessModel::gl_walk(1, 1.0, 1.0), PreconditionError);
}
