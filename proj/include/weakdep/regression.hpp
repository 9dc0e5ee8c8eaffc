#pragma once

#include <cstddef>
#include <vector>

namespace weakdep {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

// Weighted least squares y ~ intercept + slope x; stderr from the weighted residuals.
LinearFit weighted_linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                              const std::vector<double>& w);
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Two-sided Student-t quantile for confidence `level` with `dof` degrees of freedom.
double t_quantile(double level, double dof);

}  // namespace weakdep
