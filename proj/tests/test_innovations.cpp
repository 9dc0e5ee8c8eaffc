#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "weakdep/errors.hpp"
#include "weakdep/innovations.hpp"
#include "weakdep/normal.hpp"
#include "weakdep/prf.hpp"

using namespace weakdep;

TEST_CASE("philox4x32-10 known answers") {
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("normal cdf and quantile against reference values") {
  CHECK(normal_cdf(-3.0) == doctest::Approx(oracle::phi_minus_3).epsilon(1e-14));
  CHECK(normal_cdf(1.5) == doctest::Approx(oracle::phi_1_5).epsilon(1e-14));
  CHECK(normal_cdf(-10.0) == doctest::Approx(oracle::phi_minus_10).epsilon(1e-12));
  CHECK(normal_quantile(0.975) == doctest::Approx(oracle::q_0_975).epsilon(1e-14));
  CHECK(normal_quantile(1e-10) == doctest::Approx(oracle::q_1e_10).epsilon(1e-14));
  for (double p : {1e-300, 1e-5, 0.02425, 0.3, 0.5, 0.7, 0.97575, 1 - 1e-9}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-13));
  }
  CHECK(normal_pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)));
}

TEST_CASE("stream values are pure functions of their key") {
  const CoupledStream a(42, {InnovationKind::standard_gaussian});
  const CoupledStream b(42, {InnovationKind::standard_gaussian});
  for (std::int64_t t = -5; t < 50; ++t) {
    CHECK(a.value(3, Series::base, t) == b.value(3, Series::base, t));
    CHECK(a.value(3, Series::base, t) != a.value(3, Series::prime, t));
    CHECK(a.value(3, Series::base, t) == a.value({42, 3, Series::base, t}));
  }
  std::vector<double> buf(40);
  a.fill(7, Series::prime, -11, buf);
  for (std::size_t i = 0; i < buf.size(); ++i) CHECK(buf[i] == a.value(7, Series::prime, -11 + static_cast<std::int64_t>(i)));
  CHECK(a.child(1).value(0, Series::base, 1) == a.child(1).value(0, Series::base, 1));
  CHECK(a.child(1).value(0, Series::base, 1) != a.child(2).value(0, Series::base, 1));
  CHECK(CoupledStream(43, a.law()).value(0, Series::base, 1) != a.value(0, Series::base, 1));
}

TEST_CASE("bit source agrees with count_ones and Rademacher values") {
  const CoupledStream s(9, {InnovationKind::rademacher});
  std::int64_t ones = 0;
  for (std::int64_t t = -70; t < 300; ++t) {
    const double v = s.value(2, Series::base, t);
    CHECK((v == 1.0 || v == -1.0));
    CHECK(v == (s.bit(2, Series::base, t) ? 1.0 : -1.0));
    ones += s.bit(2, Series::base, t);
  }
  CHECK(s.count_ones(2, Series::base, -70, 370) == ones);
  CHECK(s.count_ones(2, Series::base, 5, 0) == 0);
}

TEST_CASE("sample moments match the declared law") {
  for (auto kind : {InnovationKind::standard_gaussian, InnovationKind::rademacher, InnovationKind::centered_uniform}) {
    const InnovationLaw law{kind};
    const CoupledStream s(11, law);
    const int R = 200000;
    double m1 = 0, m2 = 0, m3 = 0;
    for (int r = 0; r < R; ++r) {
      const double x = s.value(r, Series::base, 1);
      m1 += x;
      m2 += x * x;
      m3 += std::fabs(x) * x * x;
    }
    m1 /= R;
    m2 /= R;
    m3 /= R;
    const double sd = std::sqrt(law.variance() / R);
    CHECK(std::fabs(m1 - law.mean()) < 5 * sd);
    CHECK(m2 == doctest::Approx(law.variance()).epsilon(0.02));
    CHECK(m3 == doctest::Approx(law.abs_moment(3.0)).epsilon(0.03));
  }
  CHECK(InnovationLaw{InnovationKind::standard_gaussian}.abs_moment(3.0) ==
        doctest::Approx(2.0 * std::sqrt(2.0 / std::numbers::pi)));
  CHECK(InnovationLaw{InnovationKind::centered_uniform}.variance() == doctest::Approx(1.0));
}

TEST_CASE("primed and starred windows replace exactly the requested offsets") {
  const CoupledStream s(5, {InnovationKind::standard_gaussian});
  const auto w = draw_window(s, 4, Series::base, 100, 12);
  CHECK(w.depth() == 12);
  for (std::size_t j = 0; j < 12; ++j) CHECK(w[j] == s.value(4, Series::base, 100 - static_cast<std::int64_t>(j)));
  const auto p = primed_window(w, 3);
  const auto q = starred_window(w, 5);
  for (std::size_t j = 0; j < 12; ++j) {
    const double prime = s.value(4, Series::prime, 100 - static_cast<std::int64_t>(j));
    CHECK(p[j] == (j == 3 ? prime : w[j]));
    CHECK(q[j] == (j >= 5 ? prime : w[j]));
  }
}

TEST_CASE("law names round-trip") {
  for (auto k : {InnovationKind::standard_gaussian, InnovationKind::rademacher, InnovationKind::centered_uniform,
                 InnovationKind::raw_bit}) {
    CHECK(innovation_kind_from_string(to_string(k)) == k);
  }
}
