#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "weakdep/parallel.hpp"
#include "weakdep/processes.hpp"
#include "weakdep/variance.hpp"

namespace weakdep {

// n = 2(N-1)m + m', m/2 <= m' <= m, N >= 2.
struct BlockLayout {
  std::int64_t n = 0;
  std::int64_t m = 0;
  std::int64_t N = 0;
  std::int64_t m_prime = 0;

  using Range = std::pair<std::int64_t, std::int64_t>;  // inclusive; empty when first > second
  Range u_range(std::int64_t j) const;   // (2j-2)m+1 .. (2j-1)m, clipped to n
  Range r_range(std::int64_t j) const;   // (2j-1)m+1 .. 2jm, clipped to n
  Range y2_range(std::int64_t j) const;  // (2j-3)m+1 .. (2j-1)m, clipped to [1, n]
};

BlockLayout make_layout(std::int64_t n, std::int64_t m);

// Innovation eps_t is retained in F_m when t lies in some ((2i-1)m, 2im].
bool retained_in_F(std::int64_t t, std::int64_t m);

enum class BlockMode { exact_linear, nested_mc };
std::string to_string(BlockMode mode);

struct BlockOptions {
  BlockMode mode = BlockMode::exact_linear;
  std::size_t K = 10000;           // inner draws of the unretained innovations
  std::size_t projection_K = 256;  // tail draws for projecting Hoelder observables
  std::uint64_t seed = 0;
};

struct BlockSums {
  BlockMode mode = BlockMode::exact_linear;
  std::vector<double> U, R, Y1, Y2;       // j = 1..N stored at index j-1
  std::vector<double> U_se, R_se, Y2_se;  // Monte Carlo stderr, zero in exact mode
  std::vector<double> sigma2, sigma2_se;  // sigma_{j|m}^2
  std::vector<double> cond_mean;          // E_F X_{km}, k = 1..n at index k-1
  std::vector<double> cond_mean_se;
  double S = 0.0;                         // S_nm of this replication
  double S2_noise = 0.0;                  // Var of the estimated S^(2), zero in exact mode
};

BlockSums conditional_block_sums(const ProcessModel& model, const BlockLayout& layout, std::uint64_t replication,
                                 const BlockOptions& opt = {});

struct BlockDiagnostics {
  BlockLayout layout;
  std::uint64_t replication = 0;
  BlockMode mode = BlockMode::exact_linear;
  std::vector<double> sigma2_j;
  double sigma2_cond = 0.0;    // N^-1 sum_j sigma_{j|m}^2
  double sigma_bar2 = 0.0;     // (N - 1 + m'/2m)^-1 sum_j sigma_{j|m}^2
  double varsigma_bar2 = 0.0;  // n^-1 ||S^(2)||^2
  double ss_nm2 = 0.0;         // n^-1 ||S_nm||^2 by the autocovariance identity
  double residual = 0.0;       // |ss_nm2 - sigma_bar2 - varsigma_bar2|
};

// Exact mode: closed forms for a linear model. Nested mode: single-replication estimates, with
// varsigma_bar2 and ss_nm2 replaced by their one-sample unbiased versions.
BlockDiagnostics conditional_variances(const ProcessModel& model, const BlockLayout& layout,
                                       std::uint64_t replication, const BlockOptions& opt = {});

struct BlockSummary {
  double sigma_bar2 = 0.0, sigma_bar2_se = 0.0;
  double varsigma_bar2 = 0.0, varsigma_bar2_se = 0.0;
  double ss_nm2 = 0.0, ss_nm2_se = 0.0;
  double residual = 0.0, residual_se = 0.0;
  std::vector<double> sigma2_j;  // replication means
};

// Averages nested-mode diagnostics over replications 0..R-1.
BlockSummary summarize_blocks(const ProcessModel& model, const BlockLayout& layout, std::size_t R,
                              const BlockOptions& opt, Parallel par = {});

// sigma_hat_m^2 and ss_m^2 of the m-projected model; exact for linear models and small-m doubling maps,
// Monte Carlo autocovariances with R replications otherwise.
SigmaHat projected_sigma_hat(const ProcessModel& model, std::int64_t m, const BlockOptions& opt = {},
                             std::size_t R = 100000, Parallel par = {});

// Frequency of { N^-1 sum_j sigma_{j|m}^2 <= factor * ss_m^2 } over R replications.
double degeneracy_probability(const ProcessModel& model, const BlockLayout& layout, std::size_t R,
                              const BlockOptions& opt = {}, double factor = 0.125,
                              std::optional<double> ss_m2 = std::nullopt, Parallel par = {});

}  // namespace weakdep
