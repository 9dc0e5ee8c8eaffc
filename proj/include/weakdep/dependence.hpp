#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "weakdep/parallel.hpp"
#include "weakdep/processes.hpp"

namespace weakdep {

// B(p) = 1/2 + (p ^ 3)/(2p) - 1/p.
double boundary_B(double p);

enum class ProfileMode { closed_form, monte_carlo };
std::string to_string(ProfileMode m);

struct ThetaEntry {
  std::size_t l = 0;
  double theta_prime = 0.0;
  double theta_star = 0.0;
  double se_prime = 0.0;
  double se_star = 0.0;
};

struct DependenceProfile {
  double p = 2.0;
  std::vector<ThetaEntry> entries;
  ProfileMode mode = ProfileMode::closed_form;
  std::size_t R = 0;
};

// Dyadic grid {1, 2, 4, ..., 2^L}.
std::vector<std::size_t> dyadic_grid(std::size_t L);

struct ThetaEstimate {
  double theta_prime = 0.0;
  double theta_star = 0.0;
  double se_prime = 0.0;
  double se_star = 0.0;
};

// Plug-in p-th power means over R coupled windows, bootstrap standard errors (B resamples).
ThetaEstimate theta_mc(const ProcessModel& model, std::size_t l, double p, std::size_t R, std::uint64_t seed = 0,
                       Parallel par = {}, std::size_t B = 200);

// Closed forms for linear models: p = 2 for any law, any p >= 1 for Gaussian innovations.
ThetaEstimate theta_closed_form(const ProcessModel& model, std::size_t l, double p);

DependenceProfile closed_form_profile(const ProcessModel& model, const std::vector<std::size_t>& grid, double p = 2.0);
DependenceProfile mc_profile(const ProcessModel& model, const std::vector<std::size_t>& grid, double p,
                             std::size_t R, std::uint64_t seed = 0, Parallel par = {});

struct SurrogateEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::size_t pair = 0;  // index of the maximizing probe pair
};

// max over probe pairs (x, y) of ||X_{k x} - X_{k y}||_p, chains coupled through the same matrices.
SurrogateEstimate theta_gl_surrogate(const ProcessModel& model, std::size_t k, double p, std::size_t R,
                                     std::uint64_t seed = 0, Parallel par = {});
// Single pair version.
SurrogateEstimate theta_gl_pair(const ProcessModel& model, std::size_t k, double p, std::size_t R,
                                const std::vector<double>& x, const std::vector<double>& y, std::uint64_t seed = 0,
                                Parallel par = {});

class AssumptionSpec {
 public:
  // Throws PreconditionError unless b > B(p) and a > 0.
  AssumptionSpec(double p, double a, double b, double tail_fraction = 0.5, double level = 0.95);
  double p() const { return p_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double tail_fraction() const { return tail_fraction_; }
  double level() const { return level_; }

 private:
  double p_, a_, b_, tail_fraction_, level_;
};

enum class Verdict { satisfied_by_fit, violated_by_fit, inconclusive };
std::string to_string(Verdict v);

struct TailFit {
  double exponent = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t points = 0;
  bool exact_zero = false;  // tail entries vanish identically
};

struct AssumptionReport {
  double partial_sum_b = 0.0;      // sum k^b theta'_k over the tabulated range (dyadic block weights)
  double partial_sum_a = 0.0;      // sum k^a theta*_k
  double partial_sum_unify = 0.0;  // sum k^a sqrt(sum_{l >= k} theta'_l^2)
  TailFit prime_fit;
  TailFit star_fit;
  Verdict verdict_b = Verdict::inconclusive;      // theta' decays faster than k^-(b+1)
  Verdict verdict_a = Verdict::inconclusive;      // theta* decays faster than k^-(a+1)
  Verdict verdict_unify = Verdict::inconclusive;  // theta' decays faster than k^-(a+3/2)
  bool b_alone_sufficient = false;                // b > 1 and verdict_b satisfied
};

AssumptionReport check_assumptions(const DependenceProfile& profile, const AssumptionSpec& spec);

}  // namespace weakdep
