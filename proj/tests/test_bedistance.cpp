#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "weakdep/bedistance.hpp"
#include "weakdep/errors.hpp"
#include "weakdep/processes.hpp"
#include "weakdep/variance.hpp"

using namespace weakdep;

namespace {
const InnovationLaw gauss{InnovationKind::standard_gaussian};
const InnovationLaw rad{InnovationKind::rademacher};
}  // namespace

TEST_CASE("oracles reproduce the frozen references") {
  CHECK(oracle::rademacher_delta(16) == doctest::Approx(oracle::rademacher_16).epsilon(1e-12));
  CHECK(oracle::rademacher_delta(64) == doctest::Approx(oracle::rademacher_64).epsilon(1e-12));
  CHECK(oracle::rademacher_delta(256) == doctest::Approx(oracle::rademacher_256).epsilon(1e-12));
  CHECK(oracle::scale_delta(2.0) == doctest::Approx(oracle::scale_delta_2).epsilon(1e-12));
}

TEST_CASE("Kolmogorov distance of small samples") {
  CHECK(kolmogorov_to_normal({0.0}) == doctest::Approx(0.5));
  CHECK(kolmogorov_to_normal({1.0, -1.0}) == doctest::Approx(0.5 - oracle::Phi(-1.0)));
  CHECK(kolmogorov_to_normal({-1e9, 1e9}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(kolmogorov_to_normal({}), PreconditionError);
}

TEST_CASE("scale mismatch closed form") {
  CHECK(gaussian_closed_form_delta(1.0) == 0.0);
  CHECK(gaussian_closed_form_delta(2.0) == doctest::Approx(oracle::scale_delta_2).epsilon(1e-12));
  for (double r : {0.3, 0.9, 1.05, 4.0}) {
    CHECK(gaussian_closed_form_delta(r) == doctest::Approx(oracle::scale_delta(r)).epsilon(1e-9));
  }
}

TEST_CASE("DKW half-width") {
  CHECK(dkw_halfwidth(10000, 0.01) == doctest::Approx(std::sqrt(std::log(200.0) / 20000.0)));
  CHECK_THROWS_AS(dkw_halfwidth(100, 0.0), PreconditionError);
}

TEST_CASE("Rademacher sums against the binomial law") {
  const auto m = ProcessModel::linear(CoefficientScheme::identity(), rad);
  for (std::int64_t n : {16, 64, 256}) {
    const auto est = empirical_delta(m, n, Normalization::sqrt_n_ss2, {20000, 0.01, 9, 0, {}, {}});
    CHECK(std::fabs(est.delta - oracle::rademacher_delta(static_cast<int>(n))) <= est.dkw);
    CHECK(est.low <= est.delta);
    CHECK(est.high >= est.delta);
  }
}

TEST_CASE("Gaussian linear closed forms") {
  const auto iid = ProcessModel::linear(CoefficientScheme::identity(), gauss);
  CHECK(exact_delta_gaussian_linear(iid, 100, Normalization::sqrt_n_ss2).delta == 0.0);
  const auto pl = CoefficientScheme::power_law(1.3);
  for (std::int64_t n : {256, 4096}) {
    CHECK(exact_delta_gaussian_linear(pl, n, Normalization::sqrt_ESn2).delta == 0.0);
    const double r = std::sqrt(exact_sum_variance_linear(pl, n) / (n * oracle::zeta_1_3 * oracle::zeta_1_3));
    CHECK(exact_delta_gaussian_linear(pl, n, Normalization::sqrt_n_ss2).delta ==
          doctest::Approx(oracle::scale_delta(r)).epsilon(1e-8));
  }
  CHECK_THROWS_AS(exact_delta_gaussian_linear(CoefficientScheme::difference_power(0.25), 64, Normalization::sqrt_n_ss2),
                  DegenerateVarianceError);
  CHECK_THROWS_AS(exact_delta_gaussian_linear(ProcessModel::linear(CoefficientScheme::identity(), rad), 64,
                                              Normalization::sqrt_n_ss2),
                  UnsupportedError);
}

TEST_CASE("partial sum sampler matches the path sum") {
  const std::vector<ProcessModel> models{
      ProcessModel::linear(CoefficientScheme::identity(), rad),
      ProcessModel::linear(CoefficientScheme::geometric(0.5), gauss),
      ProcessModel::doubling(DoublingFn::cos2pi),
      center_model(ProcessModel::holder_of_linear(CoefficientScheme::geometric(0.5), gauss, HolderFn::cos_shift), 1),
      center_model(ProcessModel::gl_walk(2, 1.0, 0.2), 1, 2)};
  for (const auto& m : models) {
    const PartialSumSampler sampler(m, 31, 77);
    for (std::uint64_t r = 0; r < 5; ++r) {
      double s = 0.0;
      for (double x : sample_path(m, 31, r, 77)) s += x;
      CHECK(sampler(r) == doctest::Approx(s).epsilon(1e-10));
    }
  }
}

TEST_CASE("estimates do not depend on the thread count") {
  const auto m = ProcessModel::linear(CoefficientScheme::power_law(1.5), rad);
  EmpiricalOptions opt{5000, 0.01, 3, 100, {1}, {}};
  const auto a = empirical_delta(m, 64, Normalization::sqrt_n_ss2, opt);
  opt.par.threads = 3;
  const auto b = empirical_delta(m, 64, Normalization::sqrt_n_ss2, opt);
  CHECK(a.delta == b.delta);
  CHECK(a.rep_begin == 100);
}

TEST_CASE("degenerate normalization") {
  const auto d = ProcessModel::linear(CoefficientScheme::difference_power(0.25), rad);
  CHECK_THROWS_AS(normalizer(d, 64, Normalization::sqrt_n_ss2), DegenerateVarianceError);
  CHECK(normalizer(d, 64, Normalization::sqrt_ESn2) > 0.0);
}
