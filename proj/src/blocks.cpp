#include "weakdep/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "weakdep/errors.hpp"

namespace weakdep {

namespace {

BlockLayout::Range clip(std::int64_t lo, std::int64_t hi, std::int64_t n) {
  return {std::max<std::int64_t>(lo, 1), std::min(hi, n)};
}

void check_layout(const BlockLayout& L) {
  if (L.m < 1 || L.N < 2 || L.n != 2 * (L.N - 1) * L.m + L.m_prime || 2 * L.m_prime < L.m || L.m_prime > L.m) {
    throw PreconditionError("inconsistent block layout");
  }
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // unbiased
  double m4 = 0.0;   // fourth central moment
};

Moments moments(const double* x, std::size_t K, std::size_t stride) {
  Moments out;
  double s = 0.0;
  for (std::size_t i = 0; i < K; ++i) s += x[i * stride];
  out.mean = s / static_cast<double>(K);
  double s2 = 0.0, s4 = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    const double d = x[i * stride] - out.mean;
    s2 += d * d;
    s4 += d * d * d * d;
  }
  out.var = s2 / static_cast<double>(K - 1);
  out.m4 = s4 / static_cast<double>(K);
  return out;
}

double variance_stderr(const Moments& mo, std::size_t K) {
  const double v = mo.m4 - mo.var * mo.var;
  return std::sqrt(std::max(v, 0.0) / static_cast<double>(K));
}

// Block index j (1-based) owning time k for the U/R partition and for the Y2 groups.
std::size_t block_of(std::int64_t k, std::int64_t m) { return static_cast<std::size_t>((k - 1) / (2 * m)); }
std::size_t group_of(std::int64_t k, std::int64_t m) { return static_cast<std::size_t>((k - 1 + m) / (2 * m)); }
bool in_u(std::int64_t k, std::int64_t m) { return ((k - 1) % (2 * m)) < m; }

BlockSums exact_sums(const ProcessModel& projected, const BlockLayout& L, std::uint64_t replication,
                     std::uint64_t seed) {
  const auto& lin = projected.as_linear();
  const auto& beta = lin.alphas;
  const auto D = static_cast<std::int64_t>(std::max<std::size_t>(lin.depth, 1));
  const double mu = lin.law.mean();
  const double var = lin.law.variance();
  const double c = projected.centering();
  const std::int64_t n = L.n, m = L.m;
  const auto N = static_cast<std::size_t>(L.N);

  const std::int64_t t0 = 2 - D;
  std::vector<double> eps(static_cast<std::size_t>(n - t0 + 1));
  model_stream(projected, seed).fill(replication, Series::base, t0, eps);

  BlockSums out;
  out.mode = BlockMode::exact_linear;
  out.U.assign(N, 0.0);
  out.R.assign(N, 0.0);
  out.Y2.assign(N, 0.0);
  out.U_se.assign(N, 0.0);
  out.R_se.assign(N, 0.0);
  out.Y2_se.assign(N, 0.0);
  out.cond_mean.assign(static_cast<std::size_t>(n), 0.0);
  out.cond_mean_se.assign(static_cast<std::size_t>(n), 0.0);
  for (std::int64_t k = 1; k <= n; ++k) {
    double x = -c, ef = -c;
    for (std::int64_t j = 0; j < D && j < static_cast<std::int64_t>(beta.size()); ++j) {
      const std::int64_t t = k - j;
      const double e = eps[static_cast<std::size_t>(t - t0)];
      x += beta[static_cast<std::size_t>(j)] * e;
      ef += beta[static_cast<std::size_t>(j)] * (retained_in_F(t, m) ? e : mu);
    }
    out.cond_mean[static_cast<std::size_t>(k - 1)] = ef;
    out.S += x;
    const std::size_t b = block_of(k, m);
    (in_u(k, m) ? out.U : out.R)[b] += x - ef;
    out.Y2[group_of(k, m)] += ef;
  }
  out.Y1.resize(N);
  for (std::size_t j = 0; j < N; ++j) out.Y1[j] = out.U[j] + out.R[j];

  // Coefficient of eps_t in block j is a window sum of beta over the part of the block at or after t.
  std::vector<double> prefix(beta.size() + 1, 0.0);
  for (std::size_t i = 0; i < beta.size(); ++i) prefix[i + 1] = prefix[i] + beta[i];
  const auto window = [&](std::int64_t lo, std::int64_t hi) {  // sum beta[lo..hi]
    lo = std::max<std::int64_t>(lo, 0);
    hi = std::min<std::int64_t>(hi, static_cast<std::int64_t>(beta.size()) - 1);
    return hi < lo ? 0.0 : prefix[static_cast<std::size_t>(hi + 1)] - prefix[static_cast<std::size_t>(lo)];
  };
  out.sigma2.assign(N, 0.0);
  out.sigma2_se.assign(N, 0.0);
  for (std::size_t jj = 0; jj < N; ++jj) {
    const auto j = static_cast<std::int64_t>(jj + 1);
    const std::int64_t hi = std::min(2 * j * m, n);
    const auto v = clip((2 * j - 2) * m + 1, (2 * j - 1) * m, n);
    double acc = 0.0;
    for (std::int64_t t = v.first; t <= v.second; ++t) {
      const double ct = window(0, hi - t);
      acc += ct * ct;
    }
    out.sigma2[jj] = var * acc / static_cast<double>(2 * m);
  }
  return out;
}

BlockSums nested_sums(const ProcessModel& model, const ProcessModel& projected, const BlockLayout& L,
                      std::uint64_t replication, const BlockOptions& opt) {
  if (opt.K < 2) throw PreconditionError("nested Monte Carlo needs K >= 2 inner draws");
  const std::int64_t n = L.n, m = L.m;
  const auto N = static_cast<std::size_t>(L.N);
  const std::size_t K = opt.K;
  const auto D = static_cast<std::int64_t>(std::max<std::size_t>(projected.required_depth(), 1));
  const std::int64_t t0 = 2 - D;
  const auto width = static_cast<std::size_t>(n - t0 + 1);
  const CoupledStream stream = model_stream(model, opt.seed);
  const CoupledStream inner = stream.child(replication);

  std::vector<double> actual(width);
  stream.fill(replication, Series::base, t0, actual);
  std::vector<char> keep(width);
  for (std::size_t i = 0; i < width; ++i) keep[i] = retained_in_F(t0 + static_cast<std::int64_t>(i), m) ? 1 : 0;

  const auto un = static_cast<std::size_t>(n);
  std::vector<double> x_actual(un);
  for (std::int64_t k = 1; k <= n; ++k) {
    x_actual[static_cast<std::size_t>(k - 1)] = projected.evaluate_ascending(&actual[static_cast<std::size_t>(k - t0)]);
  }

  std::vector<double> sum_x(un, 0.0), sum_x2(un, 0.0);
  std::vector<double> usum(K * N, 0.0), rsum(K * N, 0.0), gsum(K * N, 0.0), total(K, 0.0);
  std::vector<double> buf(width);
  for (std::size_t i = 0; i < K; ++i) {
    inner.fill(i, Series::base, t0, buf);
    for (std::size_t s = 0; s < width; ++s) {
      if (keep[s]) buf[s] = actual[s];
    }
    double* u = &usum[i * N];
    double* r = &rsum[i * N];
    double* g = &gsum[i * N];
    double tot = 0.0;
    for (std::int64_t k = 1; k <= n; ++k) {
      const double x = projected.evaluate_ascending(&buf[static_cast<std::size_t>(k - t0)]);
      const auto kk = static_cast<std::size_t>(k - 1);
      sum_x[kk] += x;
      sum_x2[kk] += x * x;
      (in_u(k, m) ? u : r)[block_of(k, m)] += x;
      g[group_of(k, m)] += x;
      tot += x;
    }
    total[i] = tot;
  }

  BlockSums out;
  out.mode = BlockMode::nested_mc;
  const double Kd = static_cast<double>(K);
  out.cond_mean.resize(un);
  out.cond_mean_se.resize(un);
  for (std::size_t k = 0; k < un; ++k) {
    const double mean = sum_x[k] / Kd;
    const double var = std::max(0.0, (sum_x2[k] - Kd * mean * mean) / (Kd - 1.0));
    out.cond_mean[k] = mean;
    out.cond_mean_se[k] = std::sqrt(var / Kd);
  }
  out.U.assign(N, 0.0);
  out.R.assign(N, 0.0);
  for (std::int64_t k = 1; k <= n; ++k) {
    const auto kk = static_cast<std::size_t>(k - 1);
    out.S += x_actual[kk];
    (in_u(k, m) ? out.U : out.R)[block_of(k, m)] += x_actual[kk];
  }
  out.Y1.resize(N);
  out.Y2.resize(N);
  out.U_se.resize(N);
  out.R_se.resize(N);
  out.Y2_se.resize(N);
  out.sigma2.resize(N);
  out.sigma2_se.resize(N);
  std::vector<double> y1(K);
  for (std::size_t j = 0; j < N; ++j) {
    const Moments mu = moments(&usum[j], K, N);
    const Moments mr = moments(&rsum[j], K, N);
    const Moments mg = moments(&gsum[j], K, N);
    out.U[j] -= mu.mean;
    out.R[j] -= mr.mean;
    out.Y1[j] = out.U[j] + out.R[j];
    out.Y2[j] = mg.mean;
    out.U_se[j] = std::sqrt(mu.var / Kd);
    out.R_se[j] = std::sqrt(mr.var / Kd);
    out.Y2_se[j] = std::sqrt(mg.var / Kd);
    for (std::size_t i = 0; i < K; ++i) y1[i] = usum[i * N + j] + rsum[i * N + j];
    const Moments my = moments(y1.data(), K, 1);
    out.sigma2[j] = my.var / static_cast<double>(2 * m);
    out.sigma2_se[j] = variance_stderr(my, K) / static_cast<double>(2 * m);
  }
  out.S2_noise = moments(total.data(), K, 1).var / Kd;
  return out;
}

ProcessModel projected_for(const ProcessModel& model, std::int64_t m, const BlockOptions& opt) {
  if (model.is_gl()) throw UnsupportedError("block diagnostics need an m-projection, which the GL walk lacks");
  if (opt.mode == BlockMode::exact_linear && !model.is_linear()) {
    throw UnsupportedError("exact block mode requires a linear model; use nested-mc");
  }
  return m_project(model, static_cast<std::size_t>(m), opt.projection_K, opt.seed);
}

}  // namespace

BlockLayout::Range BlockLayout::u_range(std::int64_t j) const { return clip((2 * j - 2) * m + 1, (2 * j - 1) * m, n); }
BlockLayout::Range BlockLayout::r_range(std::int64_t j) const { return clip((2 * j - 1) * m + 1, 2 * j * m, n); }
BlockLayout::Range BlockLayout::y2_range(std::int64_t j) const { return clip((2 * j - 3) * m + 1, (2 * j - 1) * m, n); }

BlockLayout make_layout(std::int64_t n, std::int64_t m) {
  if (m < 1) throw PreconditionError("block length m must be positive");
  if (n < 3 * m) throw PreconditionError("block layout needs n >= 3m");
  for (std::int64_t N = n / (2 * m) + 1; N >= 2; --N) {
    const std::int64_t mp = n - 2 * (N - 1) * m;
    if (mp > m) break;
    if (2 * mp >= m) return BlockLayout{n, m, N, mp};
  }
  throw PreconditionError("no block layout with m/2 <= m' <= m for n = " + std::to_string(n) +
                          ", m = " + std::to_string(m));
}

bool retained_in_F(std::int64_t t, std::int64_t m) {
  const std::int64_t period = 2 * m;
  std::int64_t r = (t - 1) % period;
  if (r < 0) r += period;
  return r >= m;
}

std::string to_string(BlockMode mode) { return mode == BlockMode::exact_linear ? "exact-linear" : "nested-mc"; }

BlockSums conditional_block_sums(const ProcessModel& model, const BlockLayout& layout, std::uint64_t replication,
                                 const BlockOptions& opt) {
  check_layout(layout);
  const ProcessModel projected = projected_for(model, layout.m, opt);
  if (opt.mode == BlockMode::exact_linear) return exact_sums(projected, layout, replication, opt.seed);
  return nested_sums(model, projected, layout, replication, opt);
}

BlockDiagnostics conditional_variances(const ProcessModel& model, const BlockLayout& layout,
                                       std::uint64_t replication, const BlockOptions& opt) {
  check_layout(layout);
  const ProcessModel projected = projected_for(model, layout.m, opt);
  const double n = static_cast<double>(layout.n);
  const auto m = layout.m;
  const auto N = static_cast<std::size_t>(layout.N);
  const double eff_blocks = static_cast<double>(layout.N - 1) + static_cast<double>(layout.m_prime) / (2.0 * m);

  BlockDiagnostics d;
  d.layout = layout;
  d.replication = replication;
  d.mode = opt.mode;

  if (opt.mode == BlockMode::nested_mc) {
    const BlockSums s = nested_sums(model, projected, layout, replication, opt);
    d.sigma2_j = s.sigma2;
    const double tot = std::accumulate(s.sigma2.begin(), s.sigma2.end(), 0.0);
    d.sigma2_cond = tot / static_cast<double>(N);
    d.sigma_bar2 = tot / eff_blocks;
    const double s2 = std::accumulate(s.Y2.begin(), s.Y2.end(), 0.0);
    d.varsigma_bar2 = (s2 * s2 - s.S2_noise) / n;
    d.ss_nm2 = s.S * s.S / n;
    d.residual = std::fabs(d.ss_nm2 - d.sigma_bar2 - d.varsigma_bar2);
    return d;
  }

  const BlockSums s = exact_sums(projected, layout, replication, opt.seed);
  d.sigma2_j = s.sigma2;
  const double tot = std::accumulate(s.sigma2.begin(), s.sigma2.end(), 0.0);
  d.sigma2_cond = tot / static_cast<double>(N);
  d.sigma_bar2 = tot / eff_blocks;

  // S^(2) is a linear form in the retained innovations plus a constant.
  const auto& lin = projected.as_linear();
  const auto& beta = lin.alphas;
  const auto D = static_cast<std::int64_t>(beta.size());
  const double var = lin.law.variance();
  const double mu = lin.law.mean();
  std::vector<double> prefix(beta.size() + 1, 0.0);
  for (std::size_t i = 0; i < beta.size(); ++i) prefix[i + 1] = prefix[i] + beta[i];
  long double ret_sq = 0.0L;
  long double mean = 0.0L;
  for (std::int64_t t = 2 - D; t <= layout.n; ++t) {
    // d_t = sum_{k = max(t,1)}^{min(t+D-1,n)} beta_{k-t}
    const std::int64_t lo = std::max<std::int64_t>(1, t) - t;
    const std::int64_t hi = std::min<std::int64_t>(t + D - 1, layout.n) - t;
    if (hi < lo) continue;
    const double dt = prefix[static_cast<std::size_t>(hi + 1)] - prefix[static_cast<std::size_t>(lo)];
    mean += static_cast<long double>(mu * dt);
    if (retained_in_F(t, m)) ret_sq += static_cast<long double>(dt) * dt;
  }
  mean -= static_cast<long double>(n * projected.centering());
  const double mean_sq = static_cast<double>(mean * mean);
  d.varsigma_bar2 = (var * static_cast<double>(ret_sq) + mean_sq) / n;

  std::vector<double> gamma = linear_autocovariance(beta, beta.empty() ? 0 : beta.size() - 1);
  for (double& g : gamma) g *= var;
  d.ss_nm2 = (autocov_identity_sum_variance(gamma, layout.n) + mean_sq) / n;
  d.residual = std::fabs(d.ss_nm2 - d.sigma_bar2 - d.varsigma_bar2);
  if (d.residual > 1e-10 * std::max(1.0, d.ss_nm2)) {
    throw ConsistencyError("block variance identity residual " + std::to_string(d.residual));
  }
  return d;
}

BlockSummary summarize_blocks(const ProcessModel& model, const BlockLayout& layout, std::size_t R,
                              const BlockOptions& opt, Parallel par) {
  if (R < 2) throw PreconditionError("block summary needs R >= 2");
  check_layout(layout);
  std::vector<BlockDiagnostics> reps(R);
  parallel_for(R, par, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) reps[r] = conditional_variances(model, layout, r, opt);
  });
  const auto stat = [&](auto field, double& mean, double& se) {
    std::vector<double> v(R);
    for (std::size_t r = 0; r < R; ++r) v[r] = field(reps[r]);
    const Moments mo = moments(v.data(), R, 1);
    mean = mo.mean;
    se = std::sqrt(mo.var / static_cast<double>(R));
  };
  BlockSummary out;
  stat([](const BlockDiagnostics& d) { return d.sigma_bar2; }, out.sigma_bar2, out.sigma_bar2_se);
  stat([](const BlockDiagnostics& d) { return d.varsigma_bar2; }, out.varsigma_bar2, out.varsigma_bar2_se);
  stat([](const BlockDiagnostics& d) { return d.ss_nm2; }, out.ss_nm2, out.ss_nm2_se);
  stat([](const BlockDiagnostics& d) { return d.ss_nm2 - d.sigma_bar2 - d.varsigma_bar2; }, out.residual,
       out.residual_se);
  const auto N = static_cast<std::size_t>(layout.N);
  out.sigma2_j.assign(N, 0.0);
  for (const auto& d : reps) {
    for (std::size_t j = 0; j < N; ++j) out.sigma2_j[j] += d.sigma2_j[j] / static_cast<double>(R);
  }
  return out;
}

SigmaHat projected_sigma_hat(const ProcessModel& model, std::int64_t m, const BlockOptions& opt, std::size_t R,
                             Parallel par) {
  if (m < 1) throw PreconditionError("m must be positive");
  const ProcessModel projected = projected_for(model, m, BlockOptions{BlockMode::nested_mc, opt.K, opt.projection_K,
                                                                      opt.seed});
  const auto lags = static_cast<std::size_t>(std::max<std::int64_t>(m - 1, 1));
  AutocovarianceTable table;
  if (projected.is_linear()) {
    const auto& lin = projected.as_linear();
    table.method = AutocovMethod::exact_linear;
    table.gamma = linear_autocovariance(lin.alphas, lags);
    for (double& g : table.gamma) g *= lin.law.variance();
    table.stderr_.assign(table.gamma.size(), 0.0);
  } else if (projected.is_doubling() && lags <= 20) {
    table = autocovariance(projected, lags, AutocovMethod::exact_doubling);
  } else {
    table = autocovariance(projected, lags, AutocovMethod::monte_carlo, R, opt.seed, par);
  }
  return sigma_hat_m(table, static_cast<std::size_t>(m));
}

double degeneracy_probability(const ProcessModel& model, const BlockLayout& layout, std::size_t R,
                              const BlockOptions& opt, double factor, std::optional<double> ss_m2, Parallel par) {
  if (R < 1000) throw PreconditionError("degeneracy frequency needs R >= 1000");
  check_layout(layout);
  const double ss = ss_m2 ? *ss_m2 : projected_sigma_hat(model, layout.m, opt, 100000, par).ss_m2;
  const double threshold = factor * ss;
  std::vector<char> hit(R, 0);
  parallel_for(R, par, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      const BlockDiagnostics d = conditional_variances(model, layout, r, opt);
      hit[r] = d.sigma2_cond <= threshold ? 1 : 0;
    }
  });
  const auto count = std::count(hit.begin(), hit.end(), char{1});
  return static_cast<double>(count) / static_cast<double>(R);
}

}  // namespace weakdep
