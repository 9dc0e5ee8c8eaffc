#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace weakdep {

enum class SchemeKind { explicit_list, power_law, geometric, difference_power, difference_log };

// Linear-process coefficients alpha_0, alpha_1, ...; alpha_j = 0 for j < 0.
class CoefficientScheme {
 public:
  static CoefficientScheme from_list(std::vector<double> alphas);
  static CoefficientScheme identity();
  // alpha_0 = 0, alpha_j = j^-a.
  static CoefficientScheme power_law(double a);
  // alpha_j = rho^j.
  static CoefficientScheme geometric(double rho);
  // alpha_0 = 0, alpha_j = a_j - a_{j-1} with a_0 = 0 and a_j = j^-beta.
  static CoefficientScheme difference_power(double beta);
  // Same with a_j = 1/log(j+1).
  static CoefficientScheme difference_log();

  SchemeKind kind() const { return kind_; }
  double parameter() const { return param_; }
  std::string describe() const;

  double coefficient(std::int64_t j) const;
  // P(t) = sum_{j=0}^t alpha_j (0 for t < 0).
  double partial_sum(std::int64_t t) const;
  // sum_{i=1}^{count} alpha(x + i) for real x >= 0 using the smooth extension of alpha.
  double block_sum(double x, std::int64_t count) const;
  // sum_j alpha_j; infinite for power-law a <= 1.
  double total() const;
  // sum_{j >= J} alpha_j^2.
  double tail_square_sum(std::size_t J) const;
  double square_sum() const { return tail_square_sum(0); }

  // Number of nonzero-support coefficients for explicit schemes, 0 for infinite schemes.
  std::size_t support() const { return kind_ == SchemeKind::explicit_list ? alphas_.size() : 0; }
  bool finite() const { return kind_ == SchemeKind::explicit_list; }
  const std::vector<double>& list() const { return alphas_; }

  // Explicit scheme alpha_0..alpha_{J-1}.
  CoefficientScheme truncated(std::size_t J) const;
  std::vector<double> head(std::size_t J) const;
  // Smallest J with sqrt(tail_square_sum(J)) <= tol.
  std::size_t depth_for(double tol) const;

  // Underlying a_t for difference schemes (P(t) telescopes to a_t).
  double underlying(double t) const;

 private:
  SchemeKind kind_ = SchemeKind::explicit_list;
  double param_ = 0.0;
  std::vector<double> alphas_;
};

// sum_{j=lo}^{hi} j^-s for integers 1 <= lo, Euler-Maclaurin for large ranges.
double power_sum(double s, std::int64_t lo, std::int64_t hi);
// sum_{i=0}^{count-1} (x + i)^-s for real x >= 1.
double shifted_power_sum(double s, double x, std::int64_t count);
// sum_{j >= x} j^-s, s > 1, real x >= 1.
double power_tail(double s, double x);

}  // namespace weakdep
