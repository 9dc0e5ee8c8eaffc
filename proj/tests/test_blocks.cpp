#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "weakdep/blocks.hpp"
#include "weakdep/errors.hpp"
#include "weakdep/processes.hpp"
#include "weakdep/variance.hpp"

using namespace weakdep;

namespace {
const InnovationLaw gauss{InnovationKind::standard_gaussian};
const InnovationLaw rad{InnovationKind::rademacher};
}  // namespace

TEST_CASE("layouts match an exhaustive search") {
  for (std::int64_t m = 1; m <= 24; ++m) {
    for (std::int64_t n = 3 * m; n <= 24 * m; ++n) {
      const auto want = oracle::find_layout(n, m);
      if (want.N == 0) {
        CHECK_THROWS_AS(make_layout(n, m), PreconditionError);
        continue;
      }
      const auto L = make_layout(n, m);
      CHECK(L.N == want.N);
      CHECK(L.m_prime == want.m_prime);
      CHECK(L.n == 2 * (L.N - 1) * m + L.m_prime);
    }
  }
  CHECK_THROWS_AS(make_layout(20, 8), PreconditionError);
  CHECK_THROWS_AS(make_layout(20, 0), PreconditionError);
}

TEST_CASE("retained innovations and block ranges") {
  for (std::int64_t m : {1, 3, 8}) {
    for (std::int64_t t = -40; t <= 80; ++t) {
      bool want = false;
      for (std::int64_t i = -100; i <= 100; ++i) want = want || ((2 * i - 1) * m < t && t <= 2 * i * m);
      CHECK(retained_in_F(t, m) == want);
    }
    const auto L = make_layout(2 * 9 * m + (m + 1) / 2, m);
    std::vector<int> hits(static_cast<std::size_t>(L.n) + 1, 0), y2(static_cast<std::size_t>(L.n) + 1, 0);
    for (std::int64_t j = 1; j <= L.N; ++j) {
      for (auto [lo, hi] : {L.u_range(j), L.r_range(j)})
        for (std::int64_t k = lo; k <= hi; ++k) ++hits[static_cast<std::size_t>(k)];
      const auto [lo, hi] = L.y2_range(j);
      for (std::int64_t k = lo; k <= hi; ++k) ++y2[static_cast<std::size_t>(k)];
      // U_j holds unretained times only, R_j retained ones
      for (std::int64_t k = L.u_range(j).first; k <= L.u_range(j).second; ++k) CHECK_FALSE(retained_in_F(k, m));
      for (std::int64_t k = L.r_range(j).first; k <= L.r_range(j).second; ++k) CHECK(retained_in_F(k, m));
    }
    for (std::int64_t k = 1; k <= L.n; ++k) {
      CHECK(hits[static_cast<std::size_t>(k)] == 1);
      CHECK(y2[static_cast<std::size_t>(k)] == 1);
    }
  }
}

TEST_CASE("exact conditional variances satisfy the decomposition") {
  const auto model = ProcessModel::linear(CoefficientScheme::geometric(0.7), gauss, 256);
  for (auto [n, m] : std::vector<std::pair<std::int64_t, std::int64_t>>{{60, 4}, {89, 7}, {980, 32}, {488, 16}}) {
    const auto L = make_layout(n, m);
    for (std::uint64_t r = 0; r < 3; ++r) {
      const auto d = conditional_variances(model, L, r);
      CHECK(d.residual < 1e-10 * std::max(1.0, d.ss_nm2));
      double sum = 0.0;
      for (double v : d.sigma2_j) sum += v;
      CHECK(d.sigma2_cond == doctest::Approx(sum / L.N));
      CHECK(d.sigma_bar2 == doctest::Approx(sum / (L.N - 1 + double(L.m_prime) / (2.0 * m))));
      const auto p = m_project(model, static_cast<std::size_t>(m));
      const auto t = autocovariance(p, static_cast<std::size_t>(m), AutocovMethod::exact_linear);
      CHECK(d.ss_nm2 == doctest::Approx(autocov_identity_sum_variance(t.gamma, n) / n));
    }
  }
}

TEST_CASE("nested simulation agrees with the closed forms") {
  const auto model = ProcessModel::linear(CoefficientScheme::geometric(0.6), rad);
  const auto L = make_layout(64, 6);
  BlockOptions exact{BlockMode::exact_linear, 0, 0, 4};
  BlockOptions nested{BlockMode::nested_mc, 4000, 64, 4};
  const auto a = conditional_block_sums(model, L, 2, exact);
  const auto b = conditional_block_sums(model, L, 2, nested);
  REQUIRE(a.U.size() == static_cast<std::size_t>(L.N));
  int misses = 0, total = 0;
  for (std::size_t j = 0; j < a.U.size(); ++j) {
    misses += std::fabs(a.U[j] - b.U[j]) > 4.0 * b.U_se[j] + 1e-12;
    misses += std::fabs(a.R[j] - b.R[j]) > 4.0 * b.R_se[j] + 1e-12;
    misses += std::fabs(a.sigma2[j] - b.sigma2[j]) > 4.0 * b.sigma2_se[j];
    total += 3;
  }
  CHECK(misses <= 1);
  CHECK(a.S == doctest::Approx(b.S));
  for (std::size_t j = 0; j < a.U.size(); ++j) CHECK(b.Y1[j] == doctest::Approx(b.U[j] + b.R[j]));
}

TEST_CASE("sigma hat and degeneracy") {
  const auto model = ProcessModel::linear(CoefficientScheme::geometric(0.5), gauss, 64);
  const auto sh = projected_sigma_hat(model, 16);
  const auto t = autocovariance(m_project(model, 16), 16, AutocovMethod::exact_linear);
  CHECK(sh.value == doctest::Approx(sigma_hat_m(t, 16).value));
  const auto L = make_layout(2 * 31 * 16 + 16, 16);
  CHECK(degeneracy_probability(model, L, 1000, {}, 0.125) == 0.0);
  CHECK(degeneracy_probability(model, L, 1000, {}, 2.0) == 1.0);
  CHECK_THROWS_AS(degeneracy_probability(model, L, 10), PreconditionError);
  CHECK_THROWS_AS(conditional_variances(ProcessModel::gl_walk(2, 1.0, 0.1), L, 0), UnsupportedError);
}
