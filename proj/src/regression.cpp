#include "weakdep/regression.hpp"

#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "weakdep/errors.hpp"

namespace weakdep {

LinearFit weighted_linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                              const std::vector<double>& w) {
  const std::size_t n = x.size();
  if (y.size() != n || w.size() != n) throw PreconditionError("regression inputs differ in length");
  if (n < 2) throw PreconditionError("regression needs at least two points");
  long double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(w[i] > 0.0) || !std::isfinite(w[i])) throw PreconditionError("regression weights must be positive");
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const long double mx = sx / sw, my = sy / sw;
  long double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double dx = x[i] - mx, dy = y[i] - my;
    sxx += w[i] * dx * dx;
    sxy += w[i] * dx * dy;
    syy += w[i] * dy * dy;
  }
  if (!(sxx > 0)) throw PreconditionError("regression abscissae are all equal");
  LinearFit fit;
  fit.points = n;
  fit.slope = static_cast<double>(sxy / sxx);
  fit.intercept = static_cast<double>(my - sxy / sxx * mx);
  long double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double r = y[i] - (fit.intercept + fit.slope * x[i]);
    rss += w[i] * r * r;
  }
  fit.r_squared = syy > 0 ? static_cast<double>(1.0L - rss / syy) : 1.0;
  if (n > 2) fit.slope_stderr = static_cast<double>(std::sqrt(rss / static_cast<long double>(n - 2) / sxx));
  return fit;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  return weighted_linear_fit(x, y, std::vector<double>(x.size(), 1.0));
}

double t_quantile(double level, double dof) {
  if (!(dof > 0)) throw PreconditionError("t quantile needs positive degrees of freedom");
  boost::math::students_t dist(dof);
  return boost::math::quantile(dist, 0.5 + level / 2.0);
}

}  // namespace weakdep
