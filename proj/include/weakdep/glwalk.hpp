#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "weakdep/processes.hpp"

namespace weakdep {

// Direction chain of a d = 2 GL walk on the projective line [0, pi), discretized into `bins` cells.
// Log-gain moments follow from the chain: X_k depends on the direction before step k and on lambda_k.
class ProjectiveChain2 {
 public:
  explicit ProjectiveChain2(const GLWalkModel& model, std::size_t bins = 2048, std::size_t lambda_nodes = 24);

  bool converged() const { return converged_; }
  const std::vector<double>& stationary() const { return nu_; }
  double stationary_mean() const { return gamma_; }

  // E X_k, k = 1..count, for the walk started at the model's start direction.
  std::vector<double> step_means(std::size_t count) const;
  // Number of steps after which the direction law is within `tol` (total variation) of the stationary one.
  std::size_t mixing_steps(double tol = 1e-12, std::size_t cap = 8192) const;
  // step_means(mixing_steps(tol, cap)) in a single pass.
  std::vector<double> transient_means(double tol = 1e-12, std::size_t cap = 8192) const;
  // Stationary autocovariances gamma(0..K) of the log gains.
  std::vector<double> autocovariance(std::size_t K) const;
  // gamma(0) + 2 sum_k gamma(k), summed until the terms fall below 1e-15 gamma(0).
  double longrun_variance() const;

 private:
  std::vector<double> forward(const std::vector<double>& nu) const;
  std::vector<double> backward(const std::vector<double>& f) const;
  std::vector<double> spread(const std::vector<double>& v, bool adjoint) const;
  void deposit(std::vector<double>& grid, double angle, double mass) const;
  double interpolate(const std::vector<double>& grid, std::size_t iq) const;
  std::vector<double> after_first_step() const;

  std::size_t M_, Q_;
  double h_;
  std::vector<double> w_;       // lambda quadrature weights, summing to 1
  std::vector<std::uint32_t> cell_;  // left cell of the image of bin i under lambda_q, index i*Q + q
  std::vector<double> frac_;         // linear weight of the right neighbour
  std::vector<double> gain_;    // log gain of bin i under lambda_q
  std::vector<double> hbar_;    // E_lambda gain per bin
  double uniform_ = 0.0;        // rotation mass spread uniformly over the circle
  std::vector<std::pair<long, double>> kernel_;  // remaining rotation mass by bin offset
  std::vector<double> nu_;
  double gamma_ = 0.0;
  bool converged_ = false;
  std::vector<double> lambda_;
  double start_angle_ = 0.0;
};

}  // namespace weakdep
