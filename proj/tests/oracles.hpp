#pragma once

// Reference computations that share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

inline double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// sup_x |P(sum of n signs <= x sqrt(n)) - Phi(x)| from the binomial law, checked on both sides of every atom.
inline double rademacher_delta(int n) {
  double cdf = 0.0, best = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double p = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) -
                              n * std::log(2.0));
    const double phi = Phi((2.0 * k - n) / std::sqrt(static_cast<double>(n)));
    best = std::max(best, std::fabs(cdf - phi));
    cdf += p;
    best = std::max(best, std::fabs(cdf - phi));
  }
  return best;
}

// sup_x |Phi(x / r) - Phi(x)| by a dense scan plus golden-section refinement.
inline double scale_delta(double r) {
  auto gap = [r](double x) { return std::fabs(Phi(x / r) - Phi(x)); };
  double bx = 0.0, bv = 0.0;
  for (int i = 1; i <= 20000; ++i) {
    const double x = i * 1e-3;
    if (gap(x) > bv) {
      bv = gap(x);
      bx = x;
    }
  }
  double a = std::max(0.0, bx - 1e-3), b = bx + 1e-3;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 100; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (gap(c) > gap(d)) b = d; else a = c;
  }
  return gap(0.5 * (a + b));
}

// E S_n^2 for X_k = sum_j a_j eps_{k-j}, unit innovation variance: sum over k, l of E X_k X_l.
inline double brute_sum_variance(const std::vector<double>& a, int n) {
  const int L = static_cast<int>(a.size());
  double total = 0.0;
  for (int k = 1; k <= n; ++k) {
    for (int l = 1; l <= n; ++l) {
      // E X_k X_l = sum_j a_j a_{j + |k - l|}
      const int h = std::abs(k - l);
      for (int j = 0; j + h < L; ++j) total += a[j] * a[j + h];
    }
  }
  return total;
}

// Same quantity from the innovation weights: S_n = sum_t c_t eps_t.
inline double weight_sum_variance(const std::vector<double>& a, int n) {
  const int L = static_cast<int>(a.size());
  double total = 0.0;
  for (int t = 2 - L; t <= n; ++t) {
    double c = 0.0;
    for (int k = std::max(1, t); k <= n; ++k) {
      if (k - t < L) c += a[k - t];
    }
    total += c * c;
  }
  return total;
}

// Exhaustive search for n = 2(N-1)m + m' with m/2 <= m' <= m, largest N first.
struct Layout {
  long long N = 0, m_prime = 0;
};
inline Layout find_layout(long long n, long long m) {
  for (long long N = n; N >= 2; --N) {
    const long long mp = n - 2 * (N - 1) * m;
    if (2 * mp >= m && mp <= m) return {N, mp};
  }
  return {};
}

inline double boundary_B(double p) { return 0.5 + std::min(p, 3.0) / (2.0 * p) - 1.0 / p; }

// Frozen reference values (30-digit arithmetic).
inline constexpr double zeta_1_3 = 3.93194921180954373664;
inline constexpr double hurwitz_1_5_10 = 0.648661631941570422147;
inline constexpr double phi_minus_3 = 0.00134989803163009452665;
inline constexpr double phi_1_5 = 0.933192798731141933996;
inline constexpr double phi_minus_10 = 7.6198530241605260660e-24;
inline constexpr double q_0_975 = 1.95996398454005423552;
inline constexpr double q_1e_10 = -6.36134090240405620470;
inline constexpr double scale_delta_2 = 0.161337284417384332376;
inline constexpr double rademacher_16 = 0.0981903076171875;
inline constexpr double rademacher_64 = 0.0496733768739834482642;
inline constexpr double rademacher_256 = 0.0249095549680700756191;

}  // namespace oracle
