#include "weakdep/variance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "weakdep/errors.hpp"
#include "weakdep/glwalk.hpp"
#include "weakdep/regression.hpp"

namespace weakdep {

namespace {

constexpr double degenerate_threshold = 1e-10;
constexpr std::size_t max_exact_doubling_lag = 20;
constexpr std::size_t gl2_min_lags = 512;

constexpr double gl8_nodes[4] = {0.1834346424956498049394761, 0.5255324099163289858177390,
                                 0.7966664774136267395915539, 0.9602898564975362316835609};
constexpr double gl8_weights[4] = {0.3626837833783619829651504, 0.3137066458778872873379622,
                                   0.2223810344533744705443560, 0.1012285362903762591525314};

double frac(double v) { return v - std::floor(v); }

// int_0^1 F(x) F(2^k x mod 1) dx for a doubling-map observable.
double doubling_lag_covariance(const DoublingModel& model, std::size_t k) {
  const double scale = std::ldexp(1.0, static_cast<int>(k));
  if (model.projection > 0) {
    if (k >= model.projection) return 0.0;
    const std::size_t cells_log2 = model.projection + k;
    if (cells_log2 > 26) throw UnsupportedError("exact doubling covariance too fine for this projection order");
    const std::size_t cells = std::size_t{1} << cells_log2;
    const double h = 1.0 / static_cast<double>(cells);
    long double acc = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      const double x = (static_cast<double>(c) + 0.5) * h;
      acc += doubling_model_value(model, x) * doubling_model_value(model, frac(scale * x));
    }
    return static_cast<double>(acc * h);
  }
  const std::size_t panels = std::size_t{1} << (k + 2);
  const double h = 1.0 / static_cast<double>(panels);
  long double acc = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = (static_cast<double>(p) + 0.5) * h;
    for (int i = 0; i < 4; ++i) {
      for (int s = -1; s <= 1; s += 2) {
        const double x = mid + s * 0.5 * h * gl8_nodes[i];
        acc += gl8_weights[i] * doubling_model_value(model, x) * doubling_model_value(model, frac(scale * x));
      }
    }
  }
  return static_cast<double>(acc * 0.5 * h);
}

struct LagAccumulator {
  std::vector<long double> sum, sumsq;
};

}  // namespace

std::string to_string(AutocovMethod m) {
  switch (m) {
    case AutocovMethod::exact_linear: return "exact-linear";
    case AutocovMethod::exact_doubling: return "exact-doubling";
    case AutocovMethod::exact_gl2: return "exact-gl2";
    case AutocovMethod::monte_carlo: return "monte-carlo";
  }
  return "?";
}

AutocovMethod autocov_method_from_string(const std::string& name) {
  if (name == "exact-linear") return AutocovMethod::exact_linear;
  if (name == "exact-doubling") return AutocovMethod::exact_doubling;
  if (name == "exact-gl2") return AutocovMethod::exact_gl2;
  if (name == "monte-carlo") return AutocovMethod::monte_carlo;
  throw PreconditionError("unknown autocovariance method '" + name + "'");
}

std::vector<double> linear_autocovariance(const std::vector<double>& alphas, std::size_t K) {
  std::vector<double> g(K + 1, 0.0);
  for (std::size_t k = 0; k <= K && k < alphas.size(); ++k) {
    long double acc = 0.0;
    for (std::size_t j = 0; j + k < alphas.size(); ++j) acc += static_cast<long double>(alphas[j]) * alphas[j + k];
    g[k] = static_cast<double>(acc);
  }
  return g;
}

AutocovarianceTable autocovariance(const ProcessModel& model, std::size_t K, AutocovMethod method, std::size_t R,
                                   std::uint64_t seed, Parallel par) {
  if (K < 1) throw PreconditionError("autocovariance needs K >= 1");
  AutocovarianceTable t;
  t.method = method;
  t.stderr_.assign(K + 1, 0.0);
  if (method == AutocovMethod::exact_linear) {
    if (!model.is_linear()) throw PreconditionError("exact-linear autocovariance requires a linear model");
    const auto& lin = model.as_linear();
    if (lin.scheme.kind() == SchemeKind::geometric) {
      const double rho = lin.scheme.parameter();
      t.gamma.resize(K + 1);
      for (std::size_t k = 0; k <= K; ++k) t.gamma[k] = std::pow(rho, static_cast<double>(k)) / (1.0 - rho * rho);
    } else {
      t.gamma = linear_autocovariance(lin.alphas, K);
    }
    const double total = lin.scheme.total();
    if (std::isfinite(total)) t.exact_longrun = total * total;
    return t;
  }
  if (method == AutocovMethod::exact_doubling) {
    if (!model.is_doubling()) throw PreconditionError("exact-doubling autocovariance requires a doubling model");
    if (K > max_exact_doubling_lag) {
      throw PreconditionError("exact-doubling autocovariance supports lags up to " +
                              std::to_string(max_exact_doubling_lag));
    }
    const auto& d = model.as_doubling();
    t.gamma.resize(K + 1);
    const double c = model.centering();
    for (std::size_t k = 0; k <= K; ++k) t.gamma[k] = doubling_lag_covariance(d, k) - c * c;
    return t;
  }
  if (method == AutocovMethod::exact_gl2) {
    if (!model.is_gl() || model.as_gl().d != 2) throw PreconditionError("exact-gl2 autocovariance requires a d = 2 GL walk");
    const ProjectiveChain2 chain(model.as_gl());
    if (!chain.converged()) throw ConsistencyError("projective chain did not reach its stationary law");
    t.gamma = chain.autocovariance(K);
    t.exact_longrun = chain.longrun_variance();
    return t;
  }
  if (R < 2) throw PreconditionError("monte-carlo autocovariance needs R >= 2");
  const std::size_t t0 = model.is_gl() ? 65 : 1;
  const CoupledStream stream = model_stream(model, seed);
  auto blocks = blocked_map<LagAccumulator>(R, 1024, par, [&](std::size_t b, std::size_t e) {
    LagAccumulator acc{std::vector<long double>(K + 1, 0.0L), std::vector<long double>(K + 1, 0.0L)};
    for (std::size_t r = b; r < e; ++r) {
      const auto path = sample_path(model, stream, r, Series::base, t0 + K);
      const double x0 = path[t0 - 1];
      for (std::size_t k = 0; k <= K; ++k) {
        const long double v = x0 * path[t0 - 1 + k];
        acc.sum[k] += v;
        acc.sumsq[k] += v * v;
      }
    }
    return acc;
  });
  std::vector<long double> sum(K + 1, 0.0L), sumsq(K + 1, 0.0L);
  for (const auto& b : blocks) {
    for (std::size_t k = 0; k <= K; ++k) {
      sum[k] += b.sum[k];
      sumsq[k] += b.sumsq[k];
    }
  }
  t.gamma.resize(K + 1);
  t.replications = R;
  const auto Rl = static_cast<long double>(R);
  for (std::size_t k = 0; k <= K; ++k) {
    const long double mean = sum[k] / Rl;
    const long double var = std::max<long double>(sumsq[k] / Rl - mean * mean, 0.0L) * Rl / (Rl - 1);
    t.gamma[k] = static_cast<double>(mean);
    t.stderr_[k] = static_cast<double>(std::sqrt(var / Rl));
  }
  return t;
}

LongRunVariance longrun_variance_report(const AutocovarianceTable& table) {
  if (table.gamma.empty()) throw PreconditionError("empty autocovariance table");
  LongRunVariance out;
  const std::size_t K = table.max_lag();
  long double series = table.gamma[0];
  for (std::size_t k = 1; k <= K; ++k) series += 2.0L * table.gamma[k];
  if (K >= 8) {
    const std::size_t lo = (K + 1) / 2;
    std::vector<double> lx, ly;
    bool usable = true;
    const double sign = table.gamma[K] >= 0 ? 1.0 : -1.0;
    for (std::size_t k = lo; k <= K; ++k) {
      const double g = table.gamma[k];
      if (!(g * sign > 0.0) || (table.stderr_[k] > 0.0 && std::fabs(g) < 2.0 * table.stderr_[k])) {
        usable = false;
        break;
      }
      lx.push_back(std::log(static_cast<double>(k)));
      ly.push_back(std::log(std::fabs(g)));
    }
    if (usable && lx.size() >= 3) {
      const LinearFit fit = linear_fit(lx, ly);
      out.tail_exponent = fit.slope;
      if (fit.slope < -1.0) {
        out.tail_correction =
            2.0 * sign * std::exp(fit.intercept) * power_tail(-fit.slope, static_cast<double>(K + 1));
      }
    }
  }
  out.series_estimate = static_cast<double>(series) + out.tail_correction;
  out.exact = table.exact_longrun;
  out.ss2 = out.exact ? *out.exact : out.series_estimate;
  if (!(out.ss2 > degenerate_threshold)) {
    throw DegenerateVarianceError("long-run variance ss^2 = " + std::to_string(out.ss2) +
                                  " is not positive");
  }
  return out;
}

double longrun_variance(const AutocovarianceTable& table) { return longrun_variance_report(table).ss2; }

double autocov_identity_sum_variance(const std::vector<double>& gamma, std::int64_t n) {
  if (n < 1) throw PreconditionError("n must be positive");
  long double total = gamma.empty() ? 0.0L : gamma[0];
  long double trimmed = 0.0L;
  for (std::size_t k = 1; k < gamma.size(); ++k) {
    total += 2.0L * gamma[k];
    trimmed += 2.0L * static_cast<long double>(std::min<std::int64_t>(n, static_cast<std::int64_t>(k))) * gamma[k];
  }
  return static_cast<double>(static_cast<long double>(n) * total - trimmed);
}

BNWeights bn_weights(const std::vector<double>& alphas, std::int64_t n) {
  if (n < 1) throw PreconditionError("n must be positive");
  const auto L = static_cast<std::int64_t>(alphas.size());
  std::vector<long double> P(static_cast<std::size_t>(n + L) + 1, 0.0L);
  long double acc = 0.0L;
  for (std::int64_t t = 0; t <= n + L; ++t) {
    if (t < L) acc += alphas[static_cast<std::size_t>(t)];
    P[static_cast<std::size_t>(t)] = acc;
  }
  BNWeights w;
  const std::int64_t back = std::max<std::int64_t>(L - 1, 0);
  w.first_time = 1 - back;
  w.weights.assign(static_cast<std::size_t>(n + back), 0.0);
  // time -i (i = 0..back-1): P(n+i) - P(i); time i in 1..n: P(n-i).
  for (std::int64_t i = 0; i < back; ++i) {
    w.weights[static_cast<std::size_t>(-i - w.first_time)] =
        static_cast<double>(P[static_cast<std::size_t>(n + i)] - P[static_cast<std::size_t>(i)]);
  }
  for (std::int64_t i = 1; i <= n; ++i) {
    w.weights[static_cast<std::size_t>(i - w.first_time)] = static_cast<double>(P[static_cast<std::size_t>(n - i)]);
  }
  return w;
}

SumVarianceResult exact_sum_variance_linear_report(const CoefficientScheme& scheme, std::int64_t n) {
  if (n < 1) throw PreconditionError("n must be positive");
  SumVarianceResult out;
  const auto nl = static_cast<long double>(n);
  if (scheme.finite()) {
    const auto w = bn_weights(scheme.list(), n);
    long double acc = 0.0L;
    for (double v : w.weights) acc += static_cast<long double>(v) * v;
    out.value = static_cast<double>(acc);
    out.direct_terms = w.weights.size();
    return out;
  }
  if (scheme.kind() == SchemeKind::geometric) {
    const long double rho = scheme.parameter();
    const long double rn = std::pow(rho, nl);
    const long double q = 1.0L - rho;
    const long double forward = (nl - 2.0L * rho * (1.0L - rn) / q + rho * rho * (1.0L - rn * rn) / (1.0L - rho * rho)) /
                                (q * q);
    const long double backward = rho * rho * (1.0L - rn) * (1.0L - rn) / (q * q * (1.0L - rho * rho));
    out.value = static_cast<double>(forward + backward);
    return out;
  }
  const bool power = scheme.kind() == SchemeKind::power_law;
  const double a = scheme.parameter();
  // Forward part: sum_{t=0}^{n-1} P(t)^2.
  long double forward = 0.0L, P = 0.0L;
  for (std::int64_t t = 0; t < n; ++t) {
    if (power) {
      if (t > 0) P += std::pow(static_cast<long double>(t), static_cast<long double>(-a));
    } else {
      P = scheme.partial_sum(t);
    }
    forward += P * P;
  }
  // Backward part: sum_{i>=0} (P(n+i) - P(i))^2, direct then integral tail.
  const std::int64_t I = 16 * n + 4096;
  long double backward = 0.0L;
  if (power) {
    long double lo = 0.0L, hi = scheme.partial_sum(n);
    for (std::int64_t i = 0; i < I; ++i) {
      if (i > 0) {
        lo += std::pow(static_cast<long double>(i), static_cast<long double>(-a));
        hi += std::pow(static_cast<long double>(n + i), static_cast<long double>(-a));
      }
      const long double d = hi - lo;
      backward += d * d;
    }
  } else {
    for (std::int64_t i = 0; i < I; ++i) {
      const long double d = static_cast<long double>(scheme.partial_sum(n + i)) - scheme.partial_sum(i);
      backward += d * d;
    }
  }
  // int_{I-1/2}^inf D(x)^2 dx in u = log x, composite Simpson.
  const double u0 = std::log(static_cast<double>(I) - 0.5);
  const double span = 60.0, h = 0.005;
  const int steps = static_cast<int>(span / h);
  long double tail = 0.0L;
  for (int s = 0; s <= steps; ++s) {
    const double u = u0 + s * h;
    const double x = std::exp(u);
    const double d = scheme.block_sum(x, n);
    const double wgt = (s == 0 || s == steps) ? 1.0 : (s % 2 ? 4.0 : 2.0);
    tail += wgt * d * d * x;
  }
  tail *= h / 3.0;
  out.value = static_cast<double>(forward + backward + tail);
  out.direct_terms = static_cast<std::size_t>(I);
  out.tail_estimate = static_cast<double>(tail);
  return out;
}

double exact_sum_variance_linear(const CoefficientScheme& scheme, std::int64_t n) {
  return exact_sum_variance_linear_report(scheme, n).value;
}

SigmaHat sigma_hat_m(const AutocovarianceTable& table, std::size_t m) {
  if (m < 1) throw PreconditionError("m must be positive");
  if (table.max_lag() + 1 < m) throw PreconditionError("autocovariance table must cover lags up to m-1");
  const auto& g = table.gamma;
  const auto ml = static_cast<long double>(m);
  long double direct = 0.0L;
  for (std::size_t k = 1; k <= m; ++k) {
    for (std::size_t l = 1; l <= m; ++l) direct += g[k > l ? k - l : l - k];
  }
  long double ss_m2 = g[0];
  long double trimmed = 0.0L;
  for (std::size_t k = 1; k < m; ++k) {
    ss_m2 += 2.0L * g[k];
    trimmed += 2.0L * static_cast<long double>(k) * g[k];
  }
  SigmaHat out;
  out.value = static_cast<double>(direct / (2.0L * ml));
  out.identity = static_cast<double>((ml * ss_m2 - trimmed) / (2.0L * ml));
  out.residual = std::fabs(out.value - out.identity);
  out.ss_m2 = static_cast<double>(ss_m2);
  const bool exact = table.method != AutocovMethod::monte_carlo;
  if (exact && out.residual > 1e-8 * std::max(1.0, std::fabs(out.value))) {
    throw ConsistencyError("sigma_hat_m identity residual " + std::to_string(out.residual));
  }
  return out;
}

VarianceReport variance_report(const ProcessModel& model, std::int64_t n, std::size_t m, std::size_t K, std::size_t R,
                               std::uint64_t seed, Parallel par) {
  VarianceReport rep;
  rep.n = n;
  rep.m = m;
  if (model.is_linear()) {
    const auto& lin = model.as_linear();
    const auto table = autocovariance(model, std::max<std::size_t>(K, 1), AutocovMethod::exact_linear);
    rep.ss2 = longrun_variance(table);
    const auto sv = exact_sum_variance_linear_report(lin.scheme, n);
    rep.s_n2 = sv.value / static_cast<double>(n);
    if (m > 0) {
      const auto ptable = autocovariance(m_project(model, m), m, AutocovMethod::exact_linear);
      const auto sh = sigma_hat_m(ptable, m);
      rep.sigma_hat_m2 = sh.value;
      rep.ss_m2 = sh.ss_m2;
    }
    rep.note = "exact linear; E S_n^2 via BN coefficients (" + std::to_string(sv.direct_terms) +
               " backward terms, integral tail " + std::to_string(sv.tail_estimate) + ")";
    return rep;
  }
  const bool doubling = model.is_doubling();
  const bool gl2 = model.is_gl() && model.as_gl().d == 2;
  const std::size_t Kd = doubling ? std::min<std::size_t>(K, 20) : gl2 ? std::max<std::size_t>(K, gl2_min_lags) : K;
  const auto method = doubling ? AutocovMethod::exact_doubling : gl2 ? AutocovMethod::exact_gl2 : AutocovMethod::monte_carlo;
  const auto table = autocovariance(model, Kd, method, R, seed, par);
  const auto lr = longrun_variance_report(table);
  rep.ss2 = lr.ss2;
  rep.s_n2 = autocov_identity_sum_variance(table.gamma, n) / static_cast<double>(n);
  if (m > 0 && !model.is_gl()) {
    const auto projected = m_project(model, m, 256, seed);
    const bool exact_proj = doubling && 2 * m <= 26;
    const auto ptable = autocovariance(projected, std::max<std::size_t>(m, 1),
                                       exact_proj ? AutocovMethod::exact_doubling : AutocovMethod::monte_carlo, R,
                                       seed, par);
    const auto sh = sigma_hat_m(ptable, m);
    rep.sigma_hat_m2 = sh.value;
    rep.ss_m2 = sh.ss_m2;
  }
  rep.note = to_string(method) + " autocovariance to lag " +
             std::to_string(Kd) + "; s_n^2 from the autocovariance identity truncated at that lag";
  return rep;
}

}  // namespace weakdep
