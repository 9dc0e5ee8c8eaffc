#include "weakdep/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/zeta.hpp>

#include "weakdep/errors.hpp"

namespace weakdep {

namespace {

constexpr double em_threshold = 32.0;

// Euler-Maclaurin correction terms for f(y) = y^-s: sum_k B_2k/(2k)! f^(2k-1)(y).
double em_derivative_terms(double s, double y) {
  const double f1 = -s * std::pow(y, -s - 1.0);
  const double f3 = -s * (s + 1.0) * (s + 2.0) * std::pow(y, -s - 3.0);
  const double f5 = -s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * std::pow(y, -s - 5.0);
  return f1 / 12.0 - f3 / 720.0 + f5 / 30240.0;
}

double integral_power(double s, double lo, double hi) {
  if (std::fabs(s - 1.0) < 1e-14) return std::log(hi / lo);
  return (std::pow(lo, 1.0 - s) - std::pow(hi, 1.0 - s)) / (s - 1.0);
}

double log_a(double t) { return t <= 0.0 ? 0.0 : 1.0 / std::log(t + 1.0); }

}  // namespace

double shifted_power_sum(double s, double x, std::int64_t count) {
  if (count <= 0) return 0.0;
  if (x < em_threshold || count <= 64) {
    const std::int64_t direct = count <= 64 ? count : std::min<std::int64_t>(count, 64);
    double acc = 0.0;
    for (std::int64_t i = 0; i < direct; ++i) acc += std::pow(x + static_cast<double>(i), -s);
    return acc + shifted_power_sum(s, x + static_cast<double>(direct), count - direct);
  }
  const double y = x + static_cast<double>(count - 1);
  return integral_power(s, x, y) + 0.5 * (std::pow(x, -s) + std::pow(y, -s)) + em_derivative_terms(s, y) -
         em_derivative_terms(s, x);
}

double power_sum(double s, std::int64_t lo, std::int64_t hi) {
  if (hi < lo) return 0.0;
  return shifted_power_sum(s, static_cast<double>(lo), hi - lo + 1);
}

double power_tail(double s, double x) {
  if (s <= 1.0) return std::numeric_limits<double>::infinity();
  double acc = 0.0;
  while (x < em_threshold) {
    acc += std::pow(x, -s);
    x += 1.0;
  }
  return acc + std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s) - em_derivative_terms(s, x);
}

CoefficientScheme CoefficientScheme::from_list(std::vector<double> alphas) {
  if (alphas.empty()) throw PreconditionError("explicit coefficient list must be nonempty");
  for (double a : alphas) {
    if (!std::isfinite(a)) throw PreconditionError("explicit coefficients must be finite");
  }
  CoefficientScheme s;
  s.kind_ = SchemeKind::explicit_list;
  s.alphas_ = std::move(alphas);
  return s;
}

CoefficientScheme CoefficientScheme::identity() { return from_list({1.0}); }

CoefficientScheme CoefficientScheme::power_law(double a) {
  if (!(a > 0.5)) throw PreconditionError("power-law exponent a must exceed 1/2");
  CoefficientScheme s;
  s.kind_ = SchemeKind::power_law;
  s.param_ = a;
  return s;
}

CoefficientScheme CoefficientScheme::geometric(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw PreconditionError("geometric ratio rho must lie in (0,1)");
  CoefficientScheme s;
  s.kind_ = SchemeKind::geometric;
  s.param_ = rho;
  return s;
}

CoefficientScheme CoefficientScheme::difference_power(double beta) {
  if (!(beta > 0.0 && beta < 0.5)) throw PreconditionError("difference exponent beta must lie in (0,1/2)");
  CoefficientScheme s;
  s.kind_ = SchemeKind::difference_power;
  s.param_ = beta;
  return s;
}

CoefficientScheme CoefficientScheme::difference_log() {
  CoefficientScheme s;
  s.kind_ = SchemeKind::difference_log;
  return s;
}

std::string CoefficientScheme::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case SchemeKind::explicit_list: os << "explicit(len=" << alphas_.size() << ")"; break;
    case SchemeKind::power_law: os << "power-law(a=" << param_ << ")"; break;
    case SchemeKind::geometric: os << "geometric(rho=" << param_ << ")"; break;
    case SchemeKind::difference_power: os << "difference-power(beta=" << param_ << ")"; break;
    case SchemeKind::difference_log: os << "difference-log"; break;
  }
  return os.str();
}

double CoefficientScheme::underlying(double t) const {
  if (t <= 0.0) return 0.0;
  if (kind_ == SchemeKind::difference_power) return std::pow(t, -param_);
  if (kind_ == SchemeKind::difference_log) return log_a(t);
  throw UnsupportedError("underlying sequence only exists for difference schemes");
}

double CoefficientScheme::coefficient(std::int64_t j) const {
  if (j < 0) return 0.0;
  switch (kind_) {
    case SchemeKind::explicit_list:
      return static_cast<std::size_t>(j) < alphas_.size() ? alphas_[static_cast<std::size_t>(j)] : 0.0;
    case SchemeKind::power_law: return j == 0 ? 0.0 : std::pow(static_cast<double>(j), -param_);
    case SchemeKind::geometric: return std::pow(param_, static_cast<double>(j));
    case SchemeKind::difference_power:
    case SchemeKind::difference_log: {
      const double t = static_cast<double>(j);
      return underlying(t) - underlying(t - 1.0);
    }
  }
  return 0.0;
}

double CoefficientScheme::partial_sum(std::int64_t t) const {
  if (t < 0) return 0.0;
  switch (kind_) {
    case SchemeKind::explicit_list: {
      double acc = 0.0;
      const auto stop = std::min<std::size_t>(static_cast<std::size_t>(t) + 1, alphas_.size());
      for (std::size_t j = 0; j < stop; ++j) acc += alphas_[j];
      return acc;
    }
    case SchemeKind::power_law: return power_sum(param_, 1, t);
    case SchemeKind::geometric: return (1.0 - std::pow(param_, static_cast<double>(t + 1))) / (1.0 - param_);
    case SchemeKind::difference_power:
    case SchemeKind::difference_log: return underlying(static_cast<double>(t));
  }
  return 0.0;
}

double CoefficientScheme::block_sum(double x, std::int64_t count) const {
  if (count <= 0) return 0.0;
  const double n = static_cast<double>(count);
  switch (kind_) {
    case SchemeKind::explicit_list: {
      double acc = 0.0;
      for (std::int64_t i = 1; i <= count; ++i) {
        const double y = x + static_cast<double>(i);
        const double r = std::round(y);
        if (std::fabs(y - r) > 1e-12) throw UnsupportedError("explicit scheme has no smooth extension");
        acc += coefficient(static_cast<std::int64_t>(r));
      }
      return acc;
    }
    case SchemeKind::power_law: return shifted_power_sum(param_, x + 1.0, count);
    case SchemeKind::geometric:
      return std::pow(param_, x + 1.0) * (1.0 - std::pow(param_, n)) / (1.0 - param_);
    case SchemeKind::difference_power:
    case SchemeKind::difference_log: return underlying(x + n) - underlying(x);
  }
  return 0.0;
}

double CoefficientScheme::total() const {
  switch (kind_) {
    case SchemeKind::explicit_list: return partial_sum(static_cast<std::int64_t>(alphas_.size()));
    case SchemeKind::power_law:
      if (param_ <= 1.0) return std::numeric_limits<double>::infinity();
      return boost::math::zeta(param_);
    case SchemeKind::geometric: return 1.0 / (1.0 - param_);
    case SchemeKind::difference_power:
    case SchemeKind::difference_log: return 0.0;
  }
  return 0.0;
}

double CoefficientScheme::tail_square_sum(std::size_t J) const {
  switch (kind_) {
    case SchemeKind::explicit_list: {
      double acc = 0.0;
      for (std::size_t j = J; j < alphas_.size(); ++j) acc += alphas_[j] * alphas_[j];
      return acc;
    }
    case SchemeKind::power_law: return power_tail(2.0 * param_, static_cast<double>(std::max<std::size_t>(J, 1)));
    case SchemeKind::geometric: return std::pow(param_, 2.0 * static_cast<double>(J)) / (1.0 - param_ * param_);
    case SchemeKind::difference_power:
    case SchemeKind::difference_log: {
      // Direct summation, then alpha_j ~ a'(j - 1/2) and an integral tail.
      const std::size_t stop = std::max<std::size_t>(J, 1) + (1u << 16);
      double acc = 0.0;
      for (std::size_t j = std::max<std::size_t>(J, 1); j < stop; ++j) {
        const double c = coefficient(static_cast<std::int64_t>(j));
        acc += c * c;
      }
      const double x = static_cast<double>(stop) - 1.0;
      if (kind_ == SchemeKind::difference_power) {
        const double b = param_;
        return acc + b * b * std::pow(x, -2.0 * b - 1.0) / (2.0 * b + 1.0);
      }
      const double lg = std::log(x + 1.0);
      return acc + 1.0 / ((x + 1.0) * lg * lg * lg * lg);
    }
  }
  return 0.0;
}

std::vector<double> CoefficientScheme::head(std::size_t J) const {
  std::vector<double> out(J);
  for (std::size_t j = 0; j < J; ++j) out[j] = coefficient(static_cast<std::int64_t>(j));
  return out;
}

CoefficientScheme CoefficientScheme::truncated(std::size_t J) const {
  if (J == 0) throw PreconditionError("truncation depth must be positive");
  if (kind_ == SchemeKind::explicit_list && J >= alphas_.size()) return *this;
  return from_list(head(J));
}

std::size_t CoefficientScheme::depth_for(double tol) const {
  if (!(tol > 0.0)) throw PreconditionError("truncation tolerance must be positive");
  const double target = tol * tol;
  if (kind_ == SchemeKind::explicit_list) {
    std::size_t J = alphas_.size();
    while (J > 1 && tail_square_sum(J - 1) <= target) --J;
    return J;
  }
  std::size_t hi = 1;
  while (tail_square_sum(hi) > target) {
    if (hi > (std::size_t{1} << 40)) throw PreconditionError("truncation tolerance unreachable");
    hi *= 2;
  }
  std::size_t lo = hi / 2;
  if (lo == 0) return hi;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (tail_square_sum(mid) > target ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace weakdep
