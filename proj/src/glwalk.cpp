#include "weakdep/glwalk.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "weakdep/errors.hpp"

namespace weakdep {

namespace {

constexpr double pi = std::numbers::pi;

double wrap(double a) {
  a = std::fmod(a, pi);
  return a < 0.0 ? a + pi : a;
}

double log_gain(double lambda, double angle) {
  const double a = std::exp(lambda) * std::cos(angle);
  const double b = std::exp(-lambda) * std::sin(angle);
  return 0.5 * std::log(a * a + b * b);
}

double image(double lambda, double angle) {
  return wrap(std::atan2(std::exp(-lambda) * std::sin(angle), std::exp(lambda) * std::cos(angle)));
}

}  // namespace

ProjectiveChain2::ProjectiveChain2(const GLWalkModel& model, std::size_t bins, std::size_t lambda_nodes)
    : M_(bins), Q_(lambda_nodes), h_(pi / static_cast<double>(bins)) {
  if (model.d != 2) throw UnsupportedError("the projective chain is implemented for d = 2");
  if (M_ < 16 || M_ % 2 != 0) throw PreconditionError("projective chain needs an even bin count >= 16");
  start_angle_ = wrap(std::atan2(model.start[1], model.start[0]));

  if (model.lambda_max == 0.0) {
    Q_ = 1;
    lambda_ = {0.0};
    w_ = {1.0};
  } else {
    if (Q_ != 24) throw PreconditionError("projective chain uses 24 lambda nodes");
    using rule = boost::math::quadrature::gauss<double, 24>;
    for (std::size_t i = 0; i < rule::abscissa().size(); ++i) {
      const double x = rule::abscissa()[i], wt = rule::weights()[i];
      lambda_.push_back(model.lambda_max * x);
      w_.push_back(wt / 2.0);
      if (x != 0.0) {
        lambda_.push_back(-model.lambda_max * x);
        w_.push_back(wt / 2.0);
      }
    }
    Q_ = lambda_.size();
  }

  cell_.resize(M_ * Q_);
  frac_.resize(M_ * Q_);
  gain_.resize(M_ * Q_);
  hbar_.assign(M_, 0.0);
  for (std::size_t i = 0; i < M_; ++i) {
    const double th = (static_cast<double>(i) + 0.5) * h_;
    for (std::size_t q = 0; q < Q_; ++q) {
      const double u = image(lambda_[q], th) / h_ - 0.5;
      const double fl = std::floor(u);
      const long m = static_cast<long>(M_);
      cell_[i * Q_ + q] = static_cast<std::uint32_t>(((static_cast<long>(fl) % m) + m) % m);
      frac_[i * Q_ + q] = u - fl;
      gain_[i * Q_ + q] = log_gain(lambda_[q], th);
      hbar_[i] += w_[q] * gain_[i * Q_ + q];
    }
  }

  // phi ~ U[-spread, spread] taken mod pi: whole turns are uniform, the rest is a box.
  const double width = 2.0 * model.spread;
  if (width == 0.0) {
    kernel_ = {{0, 1.0}};
  } else {
    const double turns = std::floor(width / pi);
    const double rest = width - turns * pi;
    uniform_ = turns * pi / width;
    if (rest > 0.0) {
      const double center = std::fmod(turns, 2.0) == 0.0 ? 0.0 : pi / 2.0;
      const double lo = (center - rest / 2.0) / h_, hi = (center + rest / 2.0) / h_;
      for (long d = static_cast<long>(std::floor(lo + 0.5)); d <= static_cast<long>(std::floor(hi + 0.5)); ++d) {
        const double a = std::max(lo, static_cast<double>(d) - 0.5), b = std::min(hi, static_cast<double>(d) + 0.5);
        if (b > a) kernel_.emplace_back(d, (b - a) / (hi - lo) * (rest / width));
      }
    }
  }

  nu_.assign(M_, 1.0 / static_cast<double>(M_));
  for (std::size_t it = 0; it < 100000; ++it) {
    auto next = forward(nu_);
    double diff = 0.0;
    for (std::size_t i = 0; i < M_; ++i) diff += std::fabs(next[i] - nu_[i]);
    nu_ = std::move(next);
    if (diff < 1e-14) {
      converged_ = true;
      break;
    }
  }
  gamma_ = 0.0;
  for (std::size_t i = 0; i < M_; ++i) gamma_ += nu_[i] * hbar_[i];
}

void ProjectiveChain2::deposit(std::vector<double>& grid, double angle, double mass) const {
  const double u = angle / h_ - 0.5;
  const double fl = std::floor(u);
  const double f = u - fl;
  const long j = static_cast<long>(fl);
  const long m = static_cast<long>(M_);
  grid[static_cast<std::size_t>(((j % m) + m) % m)] += (1.0 - f) * mass;
  grid[static_cast<std::size_t>((((j + 1) % m) + m) % m)] += f * mass;
}

double ProjectiveChain2::interpolate(const std::vector<double>& grid, std::size_t iq) const {
  const std::size_t c = cell_[iq];
  const std::size_t r = c + 1 == M_ ? 0 : c + 1;
  return (1.0 - frac_[iq]) * grid[c] + frac_[iq] * grid[r];
}

std::vector<double> ProjectiveChain2::spread(const std::vector<double>& v, bool adjoint) const {
  std::vector<double> out(M_, 0.0);
  const long m = static_cast<long>(M_);
  if (uniform_ > 0.0) {
    double total = 0.0;
    for (double x : v) total += x;
    const double each = uniform_ * total / static_cast<double>(M_);
    for (double& x : out) x = each;
  }
  for (const auto& [d, wt] : kernel_) {
    // out[j] += wt * v[j - shift], indices mod M
    const auto shift = static_cast<std::size_t>((((adjoint ? -d : d) % m) + m) % m);
    for (std::size_t j = 0; j < shift; ++j) out[j] += wt * v[j + M_ - shift];
    for (std::size_t j = shift; j < M_; ++j) out[j] += wt * v[j - shift];
  }
  return out;
}

std::vector<double> ProjectiveChain2::forward(const std::vector<double>& nu) const {
  std::vector<double> pre(M_, 0.0);
  for (std::size_t i = 0; i < M_; ++i) {
    if (nu[i] == 0.0) continue;
    for (std::size_t q = 0; q < Q_; ++q) {
      const std::size_t iq = i * Q_ + q;
      const double mass = nu[i] * w_[q];
      const std::size_t c = cell_[iq];
      pre[c] += (1.0 - frac_[iq]) * mass;
      pre[c + 1 == M_ ? 0 : c + 1] += frac_[iq] * mass;
    }
  }
  return spread(pre, false);
}

std::vector<double> ProjectiveChain2::backward(const std::vector<double>& f) const {
  const auto g = spread(f, true);
  std::vector<double> out(M_, 0.0);
  for (std::size_t i = 0; i < M_; ++i) {
    double acc = 0.0;
    for (std::size_t q = 0; q < Q_; ++q) acc += w_[q] * interpolate(g, i * Q_ + q);
    out[i] = acc;
  }
  return out;
}

std::vector<double> ProjectiveChain2::after_first_step() const {
  std::vector<double> pre(M_, 0.0);
  for (std::size_t q = 0; q < Q_; ++q) deposit(pre, image(lambda_[q], start_angle_), w_[q]);
  return spread(pre, false);
}

std::vector<double> ProjectiveChain2::step_means(std::size_t count) const {
  std::vector<double> out;
  if (count == 0) return out;
  double first = 0.0;
  for (std::size_t q = 0; q < Q_; ++q) first += w_[q] * log_gain(lambda_[q], start_angle_);
  out.push_back(first);
  auto nu = after_first_step();
  while (out.size() < count) {
    double mean = 0.0;
    for (std::size_t i = 0; i < M_; ++i) mean += nu[i] * hbar_[i];
    out.push_back(mean);
    if (out.size() < count) nu = forward(nu);
  }
  return out;
}

std::size_t ProjectiveChain2::mixing_steps(double tol, std::size_t cap) const {
  return transient_means(tol, cap).size();
}

std::vector<double> ProjectiveChain2::transient_means(double tol, std::size_t cap) const {
  double first = 0.0;
  for (std::size_t q = 0; q < Q_; ++q) first += w_[q] * log_gain(lambda_[q], start_angle_);
  std::vector<double> out{first};
  auto nu = after_first_step();
  while (out.size() < cap) {
    double tv = 0.0;
    for (std::size_t i = 0; i < M_; ++i) tv += std::fabs(nu[i] - nu_[i]);
    if (0.5 * tv < tol) break;
    double mean = 0.0;
    for (std::size_t i = 0; i < M_; ++i) mean += nu[i] * hbar_[i];
    out.push_back(mean);
    nu = forward(nu);
  }
  return out;
}

std::vector<double> ProjectiveChain2::autocovariance(std::size_t K) const {
  std::vector<double> out(K + 1, 0.0);
  double second = 0.0;
  for (std::size_t i = 0; i < M_; ++i) {
    double acc = 0.0;
    for (std::size_t q = 0; q < Q_; ++q) acc += w_[q] * gain_[i * Q_ + q] * gain_[i * Q_ + q];
    second += nu_[i] * acc;
  }
  out[0] = second - gamma_ * gamma_;
  std::vector<double> f(M_);
  for (std::size_t i = 0; i < M_; ++i) f[i] = hbar_[i] - gamma_;
  for (std::size_t k = 1; k <= K; ++k) {
    const auto g = spread(f, true);
    double acc = 0.0;
    for (std::size_t i = 0; i < M_; ++i) {
      double inner = 0.0;
      for (std::size_t q = 0; q < Q_; ++q) {
        inner += w_[q] * gain_[i * Q_ + q] * interpolate(g, i * Q_ + q);
      }
      acc += nu_[i] * inner;
    }
    out[k] = acc;
    if (k < K) f = backward(f);
  }
  return out;
}

double ProjectiveChain2::longrun_variance() const {
  const auto g0 = autocovariance(0)[0];
  double total = g0;
  std::vector<double> f(M_);
  for (std::size_t i = 0; i < M_; ++i) f[i] = hbar_[i] - gamma_;
  for (std::size_t k = 1; k < 100000; ++k) {
    const auto g = spread(f, true);
    double acc = 0.0;
    for (std::size_t i = 0; i < M_; ++i) {
      double inner = 0.0;
      for (std::size_t q = 0; q < Q_; ++q) {
        inner += w_[q] * gain_[i * Q_ + q] * interpolate(g, i * Q_ + q);
      }
      acc += nu_[i] * inner;
    }
    total += 2.0 * acc;
    if (std::fabs(acc) < 1e-15 * g0) break;
    f = backward(f);
  }
  return total;
}

}  // namespace weakdep
