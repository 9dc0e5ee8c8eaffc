#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "weakdep/coefficients.hpp"
#include "weakdep/parallel.hpp"
#include "weakdep/processes.hpp"

namespace weakdep {

enum class AutocovMethod { exact_linear, exact_doubling, exact_gl2, monte_carlo };

std::string to_string(AutocovMethod m);
AutocovMethod autocov_method_from_string(const std::string& name);

struct AutocovarianceTable {
  std::vector<double> gamma;   // gamma(0..K)
  std::vector<double> stderr_;  // per lag, zero for exact methods
  AutocovMethod method = AutocovMethod::exact_linear;
  std::size_t replications = 0;
  // (sum alpha_j)^2 of the generating scheme for linear models; the chain's full series for exact-gl2.
  std::optional<double> exact_longrun;

  std::size_t max_lag() const { return gamma.empty() ? 0 : gamma.size() - 1; }
};

AutocovarianceTable autocovariance(const ProcessModel& model, std::size_t K, AutocovMethod method,
                                   std::size_t R = 0, std::uint64_t seed = 0, Parallel par = {});

struct LongRunVariance {
  double ss2 = 0.0;              // reported value (exact when available)
  double series_estimate = 0.0;  // gamma(0) + 2 sum gamma(k) + tail
  double tail_correction = 0.0;
  std::optional<double> tail_exponent;
  std::optional<double> exact;
};

// Throws DegenerateVarianceError when the long-run variance is <= 1e-10.
LongRunVariance longrun_variance_report(const AutocovarianceTable& table);
double longrun_variance(const AutocovarianceTable& table);

struct SumVarianceResult {
  double value = 0.0;
  std::size_t direct_terms = 0;  // backward BN terms summed explicitly
  double tail_estimate = 0.0;    // integral approximation beyond them
};

// E S_n^2 through the Beveridge-Nelson coefficients A_{n,i}, innovation variance 1.
SumVarianceResult exact_sum_variance_linear_report(const CoefficientScheme& scheme, std::int64_t n);
double exact_sum_variance_linear(const CoefficientScheme& scheme, std::int64_t n);

// n sum_k gamma(k) - sum_k (n ^ |k|) gamma(k), gamma(k) = 0 beyond the table.
double autocov_identity_sum_variance(const std::vector<double>& gamma, std::int64_t n);

// gamma(k) = sum_j alpha_j alpha_{j+k}, k = 0..K.
std::vector<double> linear_autocovariance(const std::vector<double>& alphas, std::size_t K);

// Weights w with S_n = sum_t w[t - first_time] eps_t for a finite coefficient list.
struct BNWeights {
  std::int64_t first_time = 1;
  std::vector<double> weights;
};
BNWeights bn_weights(const std::vector<double>& alphas, std::int64_t n);

struct SigmaHat {
  double value = 0.0;     // (2m)^-1 sum_{k,l<=m} gamma_m(|k-l|)
  double identity = 0.0;  // (m ss_m^2 - sum (m ^ |k|) gamma_m(k)) / (2m)
  double residual = 0.0;
  double ss_m2 = 0.0;
};

// Table must be for the m-projected model and cover lags up to m-1.
SigmaHat sigma_hat_m(const AutocovarianceTable& table, std::size_t m);

struct VarianceReport {
  double ss2 = 0.0;
  std::int64_t n = 0;
  double s_n2 = 0.0;
  std::size_t m = 0;
  double sigma_hat_m2 = 0.0;
  double ss_m2 = 0.0;
  std::string note;
};

VarianceReport variance_report(const ProcessModel& model, std::int64_t n, std::size_t m, std::size_t K,
                               std::size_t R, std::uint64_t seed, Parallel par = {});

}  // namespace weakdep
