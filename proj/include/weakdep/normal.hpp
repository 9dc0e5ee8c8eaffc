#pragma once

namespace weakdep {

// Standard normal cdf, accurate in both tails.
double normal_cdf(double x);

double normal_pdf(double x);

// Inverse standard normal cdf for p in (0,1); Wichura AS241, about 1e-16 relative.
double normal_quantile(double p);

}  // namespace weakdep
