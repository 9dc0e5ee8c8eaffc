#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "weakdep/bedistance.hpp"
#include "weakdep/parallel.hpp"
#include "weakdep/processes.hpp"

namespace weakdep {

// 2^lo, 2^(lo+1), ..., 2^hi.
std::vector<std::int64_t> dyadic_n_grid(int lo, int hi);

enum class RateMethod { automatic, empirical, gaussian_closed_form };
std::string to_string(RateMethod m);
RateMethod rate_method_from_string(const std::string& name);

struct RateOptions {
  std::size_t R = 100000;
  double delta_conf = 0.01;
  std::uint64_t seed = 0;
  RateMethod method = RateMethod::automatic;
  std::optional<double> ss2;  // long-run variance, computed from the model when absent
  std::uint64_t rep_offset = 0;
  Parallel par{};
};

// One estimate per grid point; grid point g uses replications rep_offset + g*R .. rep_offset + (g+1)*R - 1.
std::vector<BEEstimate> run_rate_experiment(const ProcessModel& model, const std::vector<std::int64_t>& grid,
                                            Normalization norm, const RateOptions& opt = {});

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  double level = 0.95;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<std::int64_t> n;  // points used
  std::vector<double> delta;
  std::string weighting;        // "inverse-relative-band" or "uniform"
  std::vector<std::int64_t> excluded;
  std::string note;
};

// Weighted least squares of log delta on log n. Censored and zero points are excluded.
RateFit fit_rate(const std::vector<BEEstimate>& estimates, double level = 0.95);

}  // namespace weakdep
