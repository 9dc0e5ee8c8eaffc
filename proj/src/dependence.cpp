#include "weakdep/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "weakdep/errors.hpp"
#include "weakdep/regression.hpp"

namespace weakdep {

namespace {

struct PowerMean {
  double value = 0.0;
  double stderr_ = 0.0;
};

std::size_t bounded_index(std::mt19937_64& gen, std::size_t R) {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(gen()) * R) >> 64);
}

// (mean d)^{1/p} and bootstrap standard errors for several columns sharing resample indices.
std::vector<PowerMean> bootstrap_power_means(const std::vector<std::vector<double>>& cols, double p, std::size_t B,
                                             std::uint64_t seed) {
  const std::size_t R = cols.front().size();
  std::vector<PowerMean> out(cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    long double acc = 0.0L;
    for (double v : cols[c]) acc += v;
    out[c].value = std::pow(static_cast<double>(acc / static_cast<long double>(R)), 1.0 / p);
  }
  if (B < 2) return out;
  std::mt19937_64 gen(splitmix64(seed ^ 0x626F6F74ULL));
  std::vector<std::vector<double>> reps(cols.size(), std::vector<double>(B));
  std::vector<long double> acc(cols.size());
  for (std::size_t b = 0; b < B; ++b) {
    std::fill(acc.begin(), acc.end(), 0.0L);
    for (std::size_t i = 0; i < R; ++i) {
      const std::size_t idx = bounded_index(gen, R);
      for (std::size_t c = 0; c < cols.size(); ++c) acc[c] += cols[c][idx];
    }
    for (std::size_t c = 0; c < cols.size(); ++c) {
      reps[c][b] = std::pow(static_cast<double>(acc[c] / static_cast<long double>(R)), 1.0 / p);
    }
  }
  for (std::size_t c = 0; c < cols.size(); ++c) {
    long double m = 0.0L, s = 0.0L;
    for (double v : reps[c]) m += v;
    m /= static_cast<long double>(B);
    for (double v : reps[c]) s += (v - m) * (v - m);
    out[c].stderr_ = static_cast<double>(std::sqrt(s / static_cast<long double>(B - 1)));
  }
  return out;
}

double diff_norm_factor(const InnovationLaw& law, double p) {
  if (p == 2.0) return std::sqrt(2.0 * law.variance());
  if (law.kind == InnovationKind::standard_gaussian) {
    const double abs_z = std::pow(2.0, p / 2.0) * std::tgamma((p + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
    return std::sqrt(2.0) * std::pow(abs_z, 1.0 / p);
  }
  throw UnsupportedError("closed-form dependence coefficients need p = 2 or Gaussian innovations");
}

std::vector<std::vector<double>> probe_directions(int d) {
  std::vector<std::vector<double>> probes;
  if (d == 2) {
    for (int i = 0; i < 4; ++i) {
      const double a = i * std::numbers::pi / 4.0;
      probes.push_back({std::cos(a), std::sin(a)});
    }
    return probes;
  }
  const auto du = static_cast<std::size_t>(d);
  std::vector<double> e1(du, 0.0), ed(du, 0.0), ones(du, 1.0 / std::sqrt(static_cast<double>(d))), mix(du, 0.0);
  e1[0] = 1.0;
  ed[du - 1] = 1.0;
  mix[0] = mix[1] = 1.0 / std::sqrt(2.0);
  mix[1] = -mix[1];
  return {e1, ed, ones, mix};
}

TailFit fit_tail(const std::vector<ThetaEntry>& entries, bool prime, double fraction, double level) {
  TailFit fit;
  const std::size_t start = static_cast<std::size_t>(std::floor(static_cast<double>(entries.size()) * (1.0 - fraction)));
  std::vector<double> x, y;
  bool all_zero = true;
  for (std::size_t i = start; i < entries.size(); ++i) {
    const double v = prime ? entries[i].theta_prime : entries[i].theta_star;
    if (v > 0.0) {
      all_zero = false;
      x.push_back(std::log(static_cast<double>(entries[i].l)));
      y.push_back(std::log(v));
    }
  }
  const double last = prime ? entries.back().theta_prime : entries.back().theta_star;
  if (all_zero || last == 0.0) {
    fit.exact_zero = true;
    fit.exponent = -std::numeric_limits<double>::infinity();
    fit.ci_low = fit.ci_high = fit.exponent;
    fit.points = x.size();
    return fit;
  }
  fit.points = x.size();
  if (x.size() < 3) {
    fit.exponent = std::numeric_limits<double>::quiet_NaN();
    fit.ci_low = -std::numeric_limits<double>::infinity();
    fit.ci_high = std::numeric_limits<double>::infinity();
    return fit;
  }
  const LinearFit lf = linear_fit(x, y);
  const double q = t_quantile(level, static_cast<double>(x.size() - 2));
  fit.exponent = lf.slope;
  fit.ci_low = lf.slope - q * lf.slope_stderr;
  fit.ci_high = lf.slope + q * lf.slope_stderr;
  return fit;
}

Verdict judge(const TailFit& fit, double threshold) {
  if (fit.exact_zero) return Verdict::satisfied_by_fit;
  if (fit.ci_high < threshold) return Verdict::satisfied_by_fit;
  if (fit.ci_low > threshold) return Verdict::violated_by_fit;
  return Verdict::inconclusive;
}

}  // namespace

double boundary_B(double p) {
  if (p == 0.0) throw PreconditionError("B(p) is undefined at p = 0");
  return p >= 3.0 ? 0.5 + 0.5 / p : 1.0 - 1.0 / p;
}

std::string to_string(ProfileMode m) { return m == ProfileMode::closed_form ? "closed-form" : "monte-carlo"; }

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::satisfied_by_fit: return "satisfied-by-fit";
    case Verdict::violated_by_fit: return "violated-by-fit";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

std::vector<std::size_t> dyadic_grid(std::size_t L) {
  std::vector<std::size_t> g;
  for (std::size_t i = 0; i <= L; ++i) g.push_back(std::size_t{1} << i);
  return g;
}

ThetaEstimate theta_mc(const ProcessModel& model, std::size_t l, double p, std::size_t R, std::uint64_t seed,
                       Parallel par, std::size_t B) {
  if (model.is_gl()) throw UnsupportedError("use theta_gl_surrogate for the GL walk");
  if (!(p >= 1.0)) throw PreconditionError("p must be at least 1");
  if (R < 1000) throw PreconditionError("theta_mc needs R >= 1000");
  const CoupledStream stream = model_stream(model, seed).child(l);
  const std::size_t J = std::max(model.required_depth(), l + 1);
  std::vector<std::vector<double>> cols(2, std::vector<double>(R));
  parallel_for(R, par, [&](std::size_t b, std::size_t e) {
    if (model.is_linear()) {
      const auto& a = model.as_linear().alphas;
      const std::size_t D = std::min(J, a.size());
      std::vector<double> base(J), prime(J);
      for (std::size_t r = b; r < e; ++r) {
        // ascending buffers: index i holds time l - J + 1 + i, offset j sits at J - 1 - j
        stream.fill(r, Series::base, static_cast<std::int64_t>(l) - static_cast<std::int64_t>(J) + 1, base);
        stream.fill(r, Series::prime, static_cast<std::int64_t>(l) - static_cast<std::int64_t>(J) + 1, prime);
        double tail = 0.0, tail_star = 0.0;
        for (std::size_t j = l; j < D; ++j) {
          tail += a[j] * base[J - 1 - j];
          tail_star += a[j] * prime[J - 1 - j];
        }
        const double al = l < D ? a[l] : 0.0;
        const double d_prime = al * (base[J - 1 - l] - prime[J - 1 - l]);
        cols[0][r] = std::pow(std::fabs(d_prime), p);
        cols[1][r] = std::pow(std::fabs(tail - tail_star), p);
      }
      return;
    }
    for (std::size_t r = b; r < e; ++r) {
      const auto w = draw_window(stream, r, Series::base, static_cast<std::int64_t>(l), J);
      const double x = model.evaluate(w);
      cols[0][r] = std::pow(std::fabs(x - model.evaluate(primed_window(w, l))), p);
      cols[1][r] = std::pow(std::fabs(x - model.evaluate(starred_window(w, l))), p);
    }
  });
  const auto pm = bootstrap_power_means(cols, p, B, splitmix64(seed) ^ l);
  return {pm[0].value, pm[1].value, pm[0].stderr_, pm[1].stderr_};
}

ThetaEstimate theta_closed_form(const ProcessModel& model, std::size_t l, double p) {
  if (!model.is_linear()) throw UnsupportedError("closed-form dependence coefficients need a linear model");
  const auto& lin = model.as_linear();
  const double c = diff_norm_factor(lin.law, p);
  const auto li = static_cast<std::int64_t>(l);
  return {c * std::fabs(lin.scheme.coefficient(li)), c * std::sqrt(lin.scheme.tail_square_sum(l)), 0.0, 0.0};
}

DependenceProfile closed_form_profile(const ProcessModel& model, const std::vector<std::size_t>& grid, double p) {
  DependenceProfile prof;
  prof.p = p;
  prof.mode = ProfileMode::closed_form;
  for (std::size_t l : grid) {
    const auto t = theta_closed_form(model, l, p);
    prof.entries.push_back({l, t.theta_prime, t.theta_star, 0.0, 0.0});
  }
  return prof;
}

DependenceProfile mc_profile(const ProcessModel& model, const std::vector<std::size_t>& grid, double p,
                             std::size_t R, std::uint64_t seed, Parallel par) {
  DependenceProfile prof;
  prof.p = p;
  prof.mode = ProfileMode::monte_carlo;
  prof.R = R;
  for (std::size_t l : grid) {
    const auto t = theta_mc(model, l, p, R, seed, par);
    prof.entries.push_back({l, t.theta_prime, t.theta_star, t.se_prime, t.se_star});
  }
  return prof;
}

SurrogateEstimate theta_gl_pair(const ProcessModel& model, std::size_t k, double p, std::size_t R,
                                const std::vector<double>& x, const std::vector<double>& y, std::uint64_t seed,
                                Parallel par) {
  const auto& g = model.as_gl();
  if (x.size() != static_cast<std::size_t>(g.d) || y.size() != static_cast<std::size_t>(g.d)) {
    throw PreconditionError("probe directions have wrong dimension");
  }
  if (k == 0) return {};
  const CoupledStream stream = model_stream(model, seed);
  std::vector<double> d(R);
  parallel_for(R, par, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      const auto gx = gl_log_gains(g, stream, r, k, x);
      const auto gy = gl_log_gains(g, stream, r, k, y);
      d[r] = std::pow(std::fabs(gx[k - 1] - gy[k - 1]), p);
    }
  });
  long double m = 0.0L, s = 0.0L;
  for (double v : d) m += v;
  m /= static_cast<long double>(R);
  for (double v : d) s += (v - m) * (v - m);
  const double sd = static_cast<double>(std::sqrt(s / static_cast<long double>(R - 1)));
  SurrogateEstimate out;
  out.value = std::pow(static_cast<double>(m), 1.0 / p);
  out.stderr_ = m > 0 ? out.value / (p * static_cast<double>(m)) * sd / std::sqrt(static_cast<double>(R)) : 0.0;
  return out;
}

SurrogateEstimate theta_gl_surrogate(const ProcessModel& model, std::size_t k, double p, std::size_t R,
                                     std::uint64_t seed, Parallel par) {
  const auto& g = model.as_gl();
  const auto probes = probe_directions(g.d);
  SurrogateEstimate best;
  std::size_t idx = 0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    for (std::size_t j = i + 1; j < probes.size(); ++j, ++idx) {
      auto est = theta_gl_pair(model, k, p, R, probes[i], probes[j], seed, par);
      if (idx == 0 || est.value > best.value) {
        best = est;
        best.pair = idx;
      }
    }
  }
  return best;
}

AssumptionSpec::AssumptionSpec(double p, double a, double b, double tail_fraction, double level)
    : p_(p), a_(a), b_(b), tail_fraction_(tail_fraction), level_(level) {
  if (!(p >= 2.0)) throw PreconditionError("assumption spec needs p >= 2");
  if (!(a > 0.0)) throw PreconditionError("assumption exponent a must be positive");
  if (!(b > boundary_B(p))) {
    throw PreconditionError("assumption exponent b = " + std::to_string(b) + " must exceed B(p) = " +
                            std::to_string(boundary_B(p)));
  }
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw PreconditionError("tail fraction must lie in (0,1]");
  if (!(level > 0.0 && level < 1.0)) throw PreconditionError("confidence level must lie in (0,1)");
}

AssumptionReport check_assumptions(const DependenceProfile& profile, const AssumptionSpec& spec) {
  if (profile.entries.size() < 8) throw PreconditionError("check_assumptions needs at least 8 profile entries");
  auto entries = profile.entries;
  std::sort(entries.begin(), entries.end(), [](const ThetaEntry& x, const ThetaEntry& y) { return x.l < y.l; });
  AssumptionReport rep;
  const std::size_t n = entries.size();
  std::vector<double> weight(n);
  for (std::size_t i = 0; i < n; ++i) {
    weight[i] = i + 1 < n ? static_cast<double>(entries[i + 1].l - entries[i].l)
                          : static_cast<double>(std::max<std::size_t>(entries[i].l, 1));
  }
  std::vector<double> tail_sq(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    tail_sq[i] = tail_sq[i + 1] + weight[i] * entries[i].theta_prime * entries[i].theta_prime;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto l = static_cast<double>(std::max<std::size_t>(entries[i].l, 1));
    rep.partial_sum_b += weight[i] * std::pow(l, spec.b()) * entries[i].theta_prime;
    rep.partial_sum_a += weight[i] * std::pow(l, spec.a()) * entries[i].theta_star;
    rep.partial_sum_unify += weight[i] * std::pow(l, spec.a()) * std::sqrt(tail_sq[i]);
  }
  rep.prime_fit = fit_tail(entries, true, spec.tail_fraction(), spec.level());
  rep.star_fit = fit_tail(entries, false, spec.tail_fraction(), spec.level());
  rep.verdict_b = judge(rep.prime_fit, -(spec.b() + 1.0));
  rep.verdict_a = judge(rep.star_fit, -(spec.a() + 1.0));
  rep.verdict_unify = judge(rep.prime_fit, -(spec.a() + 1.5));
  rep.b_alone_sufficient = spec.b() > 1.0 && rep.verdict_b == Verdict::satisfied_by_fit;
  return rep;
}

}  // namespace weakdep
