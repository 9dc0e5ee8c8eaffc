#include "weakdep/bedistance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "weakdep/errors.hpp"
#include "weakdep/normal.hpp"
#include "weakdep/variance.hpp"

namespace weakdep {

namespace {

constexpr double two_pow_64_inv = 5.42101086242752217003726400434970855712890625e-20;

// Phi(a) - Phi(b) without cancellation in the tails.
double normal_diff(double a, double b) {
  if (a > 0 && b > 0) return 0.5 * (std::erfc(b / std::sqrt(2.0)) - std::erfc(a / std::sqrt(2.0)));
  return normal_cdf(a) - normal_cdf(b);
}

}  // namespace

std::string to_string(Normalization n) {
  return n == Normalization::sqrt_n_ss2 ? "sqrt-n-ss2" : "sqrt-ESn2";
}

std::string to_string(DeltaMethod m) {
  return m == DeltaMethod::empirical ? "empirical" : "gaussian-closed-form";
}

Normalization normalization_from_string(const std::string& name) {
  if (name == "sqrt-n-ss2") return Normalization::sqrt_n_ss2;
  if (name == "sqrt-ESn2") return Normalization::sqrt_ESn2;
  throw PreconditionError("unknown normalization '" + name + "'");
}

double dkw_halfwidth(std::size_t R, double delta_conf) {
  if (R < 1) throw PreconditionError("DKW band needs R >= 1");
  if (!(delta_conf > 0.0 && delta_conf < 1.0)) throw PreconditionError("delta_conf must lie in (0,1)");
  return std::sqrt(std::log(2.0 / delta_conf) / (2.0 * static_cast<double>(R)));
}

double kolmogorov_to_normal(std::vector<double> samples) {
  if (samples.empty()) throw PreconditionError("no samples");
  std::sort(samples.begin(), samples.end());
  const auto R = static_cast<double>(samples.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double phi = normal_cdf(samples[i]);
    sup = std::max({sup, static_cast<double>(i + 1) / R - phi, phi - static_cast<double>(i) / R});
  }
  return sup;
}

double gaussian_closed_form_delta(double r) {
  if (!(r > 0.0)) throw PreconditionError("scale ratio r must be positive");
  if (r == 1.0) return 0.0;
  auto g = [r](double x) { return std::fabs(normal_diff(x / r, x)); };
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 10.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double gc = g(c), gd = g(d);
  while (b - a > 1e-11) {
    if (gc > gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - invphi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + invphi * (b - a);
      gd = g(d);
    }
  }
  return g(0.5 * (a + b));
}

namespace {

// Coefficients actually driving sample paths of a linear model.
CoefficientScheme simulated_scheme(const ProcessModel& model) {
  return CoefficientScheme::from_list(model.as_linear().alphas);
}

}  // namespace

double normalizer(const ProcessModel& model, std::int64_t n, Normalization norm, const Scales& scales,
                  std::uint64_t seed, Parallel par) {
  if (n < 1) throw PreconditionError("n must be positive");
  const auto nd = static_cast<double>(n);
  if (norm == Normalization::sqrt_ESn2) {
    double esn2;
    if (scales.esn2) {
      esn2 = *scales.esn2;
    } else if (model.is_linear()) {
      esn2 = exact_sum_variance_linear(simulated_scheme(model), n) * model.law().variance();
    } else {
      esn2 = variance_report(model, n, 0, 64, 100000, seed, par).s_n2 * nd;
    }
    if (!(esn2 > 1e-10)) throw DegenerateVarianceError("E S_n^2 is not positive");
    return std::sqrt(esn2);
  }
  double ss2;
  if (scales.ss2) {
    ss2 = *scales.ss2;
  } else if (model.is_linear()) {
    const double full = model.as_linear().scheme.total();
    if (!(full * full > 1e-10)) {
      throw DegenerateVarianceError("long-run variance ss^2 is not positive");
    }
    const auto& a = model.as_linear().alphas;
    const double total = std::accumulate(a.begin(), a.end(), 0.0);
    ss2 = total * total * model.law().variance();
  } else {
    ss2 = variance_report(model, n, 0, 64, 100000, seed, par).ss2;
  }
  if (!(ss2 > 1e-10)) throw DegenerateVarianceError("long-run variance ss^2 is not positive");
  return std::sqrt(nd * ss2);
}

PartialSumSampler::PartialSumSampler(const ProcessModel& model, std::uint64_t seed, std::int64_t n)
    : model_(model), stream_(model_stream(model, seed)), n_(n), path_(Path::generic) {
  if (n < 1) throw PreconditionError("n must be positive");
  if (model.is_linear()) {
    const auto& lin = model.as_linear();
    if (lin.law.kind == InnovationKind::rademacher && lin.depth == 1 && lin.alphas[0] == 1.0 &&
        model.centering() == 0.0) {
      path_ = Path::rademacher_iid;
    } else {
      path_ = Path::linear_weights;
      auto w = bn_weights(lin.alphas, n);
      first_time_ = w.first_time;
      weights_ = std::move(w.weights);
    }
  } else if (model.is_doubling() && model.as_doubling().projection == 0 && model.as_doubling().depth == 64) {
    path_ = Path::doubling_fast;
  }
}

double PartialSumSampler::operator()(std::uint64_t replication) const {
  switch (path_) {
    case Path::rademacher_iid:
      return static_cast<double>(2 * stream_.count_ones(replication, Series::base, 1, n_) - n_);
    case Path::linear_weights: {
      thread_local std::vector<double> eps;
      eps.resize(weights_.size());
      stream_.fill(replication, Series::base, first_time_, eps);
      long double acc = 0.0L;
      for (std::size_t i = 0; i < eps.size(); ++i) acc += weights_[i] * eps[i];
      return static_cast<double>(acc) - static_cast<double>(n_) * model_.centering();
    }
    case Path::doubling_fast: {
      const auto f = model_.as_doubling().f;
      std::uint64_t u = 0;
      for (std::int64_t t = 2 - 64; t <= 0; ++t) {
        u = (u >> 1) | (static_cast<std::uint64_t>(stream_.bit(replication, Series::base, t)) << 63);
      }
      double acc = 0.0;
      std::int64_t t = 1;
      while (t <= n_) {
        const std::int64_t blk = t >> 7;
        const PhiloxCounter b = stream_.block(replication, Series::base, blk);
        const std::int64_t blk_end = std::min<std::int64_t>((blk + 1) << 7, n_ + 1);
        for (; t < blk_end; ++t) {
          const int pos = static_cast<int>(t & 127);
          u = (u >> 1) | (static_cast<std::uint64_t>((b[pos >> 5] >> (pos & 31)) & 1u) << 63);
          acc += doubling_observable(f, static_cast<double>(u) * two_pow_64_inv);
        }
      }
      return acc - static_cast<double>(n_) * model_.centering();
    }
    case Path::generic: {
      const auto path = sample_path(model_, stream_, replication, Series::base, static_cast<std::size_t>(n_));
      long double acc = 0.0L;
      for (double x : path) acc += x;
      return static_cast<double>(acc);
    }
  }
  return 0.0;
}

BEEstimate empirical_delta(const ProcessModel& model, std::int64_t n, Normalization norm,
                           const EmpiricalOptions& opt) {
  if (opt.R < 1000) throw PreconditionError("empirical_delta needs R >= 1000");
  const double denom = normalizer(model, n, norm, opt.scales, opt.seed, opt.par);
  const PartialSumSampler sampler(model, opt.seed, n);
  std::vector<double> t(opt.R);
  parallel_for(opt.R, opt.par, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) t[r] = sampler(opt.rep_begin + r) / denom;
  });
  BEEstimate est;
  est.n = n;
  est.normalization = norm;
  est.method = DeltaMethod::empirical;
  est.R = opt.R;
  est.seed = opt.seed;
  est.rep_begin = opt.rep_begin;
  est.delta = kolmogorov_to_normal(std::move(t));
  est.dkw = dkw_halfwidth(opt.R, opt.delta_conf);
  est.low = std::max(0.0, est.delta - est.dkw);
  est.high = std::min(1.0, est.delta + est.dkw);
  return est;
}

BEEstimate exact_delta_gaussian_linear(const CoefficientScheme& scheme, std::int64_t n, Normalization norm) {
  BEEstimate est;
  est.n = n;
  est.normalization = norm;
  est.method = DeltaMethod::gaussian_closed_form;
  if (norm == Normalization::sqrt_ESn2) {
    if (!(exact_sum_variance_linear(scheme, n) > 1e-10)) throw DegenerateVarianceError("E S_n^2 is not positive");
    return est;
  }
  const double total = scheme.total();
  const double ss2 = total * total;
  if (!(ss2 > 1e-10) || !std::isfinite(ss2)) {
    throw DegenerateVarianceError("long-run variance ss^2 is not positive and finite");
  }
  const double r = std::sqrt(exact_sum_variance_linear(scheme, n) / (static_cast<double>(n) * ss2));
  est.delta = gaussian_closed_form_delta(r);
  est.low = est.high = est.delta;
  return est;
}

BEEstimate exact_delta_gaussian_linear(const ProcessModel& model, std::int64_t n, Normalization norm) {
  if (!model.is_linear()) throw UnsupportedError("closed-form Delta_n needs a linear model");
  if (model.law().kind != InnovationKind::standard_gaussian) {
    throw UnsupportedError("closed-form Delta_n needs Gaussian innovations");
  }
  return exact_delta_gaussian_linear(model.as_linear().scheme, n, norm);
}

}  // namespace weakdep
