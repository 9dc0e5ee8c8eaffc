#include "weakdep/rates.hpp"

#include <cmath>

#include "weakdep/errors.hpp"
#include "weakdep/regression.hpp"

namespace weakdep {

std::vector<std::int64_t> dyadic_n_grid(int lo, int hi) {
  if (lo < 0 || hi < lo || hi > 62) throw PreconditionError("dyadic grid needs 0 <= lo <= hi <= 62");
  std::vector<std::int64_t> out;
  for (int e = lo; e <= hi; ++e) out.push_back(std::int64_t{1} << e);
  return out;
}

std::string to_string(RateMethod m) {
  switch (m) {
    case RateMethod::automatic: return "auto";
    case RateMethod::empirical: return "empirical";
    case RateMethod::gaussian_closed_form: return "gaussian-closed-form";
  }
  return "auto";
}

RateMethod rate_method_from_string(const std::string& name) {
  if (name == "auto") return RateMethod::automatic;
  if (name == "empirical") return RateMethod::empirical;
  if (name == "gaussian-closed-form") return RateMethod::gaussian_closed_form;
  throw PreconditionError("unknown rate method '" + name + "'");
}

std::vector<BEEstimate> run_rate_experiment(const ProcessModel& model, const std::vector<std::int64_t>& grid,
                                            Normalization norm, const RateOptions& opt) {
  if (grid.size() < 4) throw PreconditionError("rate experiments need at least 4 grid points");
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto n = grid[g];
    if (n < 1 || (n & (n - 1)) != 0) throw PreconditionError("grid point " + std::to_string(n) + " is not dyadic");
    if (g > 0 && n <= grid[g - 1]) throw PreconditionError("grid must be strictly increasing");
  }
  const bool gaussian_linear = model.is_linear() && model.law().kind == InnovationKind::standard_gaussian;
  bool closed = false;
  switch (opt.method) {
    case RateMethod::automatic: closed = gaussian_linear; break;
    case RateMethod::empirical: closed = false; break;
    case RateMethod::gaussian_closed_form:
      if (!gaussian_linear) throw UnsupportedError("closed-form Delta_n needs a Gaussian linear model");
      closed = true;
      break;
  }
  std::vector<BEEstimate> out;
  out.reserve(grid.size());
  if (closed) {
    for (auto n : grid) out.push_back(exact_delta_gaussian_linear(model, n, norm));
    return out;
  }
  Scales scales;
  if (norm == Normalization::sqrt_n_ss2) {
    if (opt.ss2) {
      scales.ss2 = *opt.ss2;
    } else {
      const double s = normalizer(model, 1, norm, {}, opt.seed, opt.par);
      scales.ss2 = s * s;
    }
  }
  for (std::size_t g = 0; g < grid.size(); ++g) {
    EmpiricalOptions eo;
    eo.R = opt.R;
    eo.delta_conf = opt.delta_conf;
    eo.seed = opt.seed;
    eo.rep_begin = opt.rep_offset + static_cast<std::uint64_t>(g) * opt.R;
    eo.par = opt.par;
    eo.scales = scales;
    out.push_back(empirical_delta(model, grid[g], norm, eo));
  }
  return out;
}

RateFit fit_rate(const std::vector<BEEstimate>& estimates, double level) {
  RateFit fit;
  fit.level = level;
  std::vector<double> x, y, rel;
  std::size_t censored = 0, zero = 0;
  for (const auto& e : estimates) {
    if (e.censored()) {
      ++censored;
      fit.excluded.push_back(e.n);
      continue;
    }
    if (!(e.delta > 0.0)) {
      ++zero;
      fit.excluded.push_back(e.n);
      continue;
    }
    fit.n.push_back(e.n);
    fit.delta.push_back(e.delta);
    x.push_back(std::log(static_cast<double>(e.n)));
    y.push_back(std::log(e.delta));
    rel.push_back((e.high - e.low) / e.delta);
  }
  if (x.size() < 4) {
    throw PreconditionError("rate fit needs at least 4 positive uncensored points, got " + std::to_string(x.size()));
  }
  bool banded = true;
  for (double r : rel) banded = banded && r > 0.0 && std::isfinite(r);
  std::vector<double> w(x.size(), 1.0);
  if (banded) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / (rel[i] * rel[i]);
  }
  fit.weighting = banded ? "inverse-relative-band" : "uniform";
  const LinearFit lf = weighted_linear_fit(x, y, w);
  fit.slope = lf.slope;
  fit.intercept = lf.intercept;
  fit.slope_stderr = lf.slope_stderr;
  fit.r_squared = lf.r_squared;
  const double q = t_quantile(level, static_cast<double>(x.size() - 2));
  fit.ci_low = fit.slope - q * fit.slope_stderr;
  fit.ci_high = fit.slope + q * fit.slope_stderr;
  if (censored > 0) fit.note += std::to_string(censored) + " point(s) below the DKW half-width excluded. ";
  if (zero > 0) fit.note += std::to_string(zero) + " zero point(s) excluded. ";
  if (!fit.note.empty()) fit.note.pop_back();
  return fit;
}

}  // namespace weakdep
