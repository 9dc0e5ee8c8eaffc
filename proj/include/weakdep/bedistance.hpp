#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "weakdep/parallel.hpp"
#include "weakdep/processes.hpp"

namespace weakdep {

enum class Normalization { sqrt_n_ss2, sqrt_ESn2 };
enum class DeltaMethod { empirical, gaussian_closed_form };

std::string to_string(Normalization n);
std::string to_string(DeltaMethod m);
Normalization normalization_from_string(const std::string& name);

struct BEEstimate {
  std::int64_t n = 0;
  Normalization normalization = Normalization::sqrt_n_ss2;
  double delta = 0.0;
  double low = 0.0;
  double high = 0.0;
  DeltaMethod method = DeltaMethod::empirical;
  std::size_t R = 0;
  std::uint64_t seed = 0;
  std::uint64_t rep_begin = 0;  // replications rep_begin .. rep_begin + R - 1
  double dkw = 0.0;             // DKW half-width of the band, 0 for closed forms

  // Below its own noise floor, hence excluded from rate fits.
  bool censored() const { return method == DeltaMethod::empirical && delta < dkw; }
};

double dkw_halfwidth(std::size_t R, double delta_conf);

// sup_x |F_R(x) - Phi(x)| for the empirical cdf of `samples`, evaluated at its jump points.
double kolmogorov_to_normal(std::vector<double> samples);

// sup_x |Phi(x / r) - Phi(x)|.
double gaussian_closed_form_delta(double r);

struct Scales {
  std::optional<double> ss2;   // long-run variance
  std::optional<double> esn2;  // E S_n^2 at the requested n
};

// Denominator of the normalized sum. Missing scales are computed from the model; for linear models
// they come from the truncated coefficient list that drives the sampler.
double normalizer(const ProcessModel& model, std::int64_t n, Normalization norm, const Scales& scales = {},
                  std::uint64_t seed = 0, Parallel par = {});

struct EmpiricalOptions {
  std::size_t R = 100000;
  double delta_conf = 0.01;
  std::uint64_t seed = 0;
  std::uint64_t rep_begin = 0;
  Parallel par{};
  Scales scales{};
};

// S_n for one replication, using closed-form weights or bit counting where possible.
class PartialSumSampler {
 public:
  PartialSumSampler(const ProcessModel& model, std::uint64_t seed, std::int64_t n);
  double operator()(std::uint64_t replication) const;

 private:
  ProcessModel model_;
  CoupledStream stream_;
  std::int64_t n_;
  enum class Path { rademacher_iid, linear_weights, doubling_fast, generic } path_;
  std::int64_t first_time_ = 1;
  std::vector<double> weights_;
};

BEEstimate empirical_delta(const ProcessModel& model, std::int64_t n, Normalization norm,
                           const EmpiricalOptions& opt);

BEEstimate exact_delta_gaussian_linear(const ProcessModel& model, std::int64_t n, Normalization norm);
BEEstimate exact_delta_gaussian_linear(const CoefficientScheme& scheme, std::int64_t n, Normalization norm);

}  // namespace weakdep
