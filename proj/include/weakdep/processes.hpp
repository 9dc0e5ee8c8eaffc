#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "weakdep/coefficients.hpp"
#include "weakdep/innovations.hpp"

namespace weakdep {

enum class DoublingFn { cos2pi, centered_x, indicator_half };
enum class HolderFn { cos_shift, abs_center, cube_clip };

std::string to_string(DoublingFn f);
std::string to_string(HolderFn f);
DoublingFn doubling_fn_from_string(const std::string& name);
HolderFn holder_fn_from_string(const std::string& name);

inline constexpr double default_truncation_tol = 1e-3;

struct LinearModel {
  CoefficientScheme scheme;  // the full (possibly infinite) scheme
  InnovationLaw law;
  std::size_t depth = 0;     // coefficients alpha_0..alpha_{depth-1} are used
  std::vector<double> alphas;
};

struct HolderModel {
  CoefficientScheme scheme;
  InnovationLaw law;
  HolderFn f = HolderFn::cos_shift;
  double beta = 1.0;
  double c = 1.0;
  std::size_t depth = 0;
  std::vector<double> alphas;
  // m-projection: inner linear part uses alphas[0..projection-1] and averages f over tail samples.
  std::size_t projection = 0;
  std::vector<double> tail_samples;
};

struct DoublingModel {
  DoublingFn f = DoublingFn::cos2pi;
  std::size_t depth = 64;
  std::size_t projection = 0;
};

// g = R(phi) diag(e^lambda, e^-lambda, 1, ...), lambda ~ U[-lambda_max, lambda_max],
// phi ~ U[-spread, spread]; for d > 2, R is a product of rotations in planes (i, i+1).
struct GLWalkModel {
  int d = 2;
  double lambda_max = 1.0;
  double spread = 3.14159265358979323846;
  std::vector<double> start;
  std::vector<double> step_means;  // centering for steps 1..B
  double stationary_mean = 0.0;    // centering for steps beyond B
};

class ProcessModel {
 public:
  using Variant = std::variant<LinearModel, HolderModel, DoublingModel, GLWalkModel>;

  // depth 0 selects the truncation-error policy (tolerance default_truncation_tol).
  static ProcessModel linear(CoefficientScheme scheme, InnovationLaw law, std::size_t depth = 0);
  static ProcessModel holder_of_linear(CoefficientScheme scheme, InnovationLaw law, HolderFn f, double beta = 1.0,
                                       std::size_t depth = 0);
  static ProcessModel doubling(DoublingFn f, std::size_t depth = 64);
  static ProcessModel gl_walk(int d, double lambda_max, double spread, std::vector<double> start = {});
  static ProcessModel from_variant(Variant v, double centering = 0.0);

  const Variant& variant() const { return v_; }
  bool is_linear() const { return std::holds_alternative<LinearModel>(v_); }
  bool is_holder() const { return std::holds_alternative<HolderModel>(v_); }
  bool is_doubling() const { return std::holds_alternative<DoublingModel>(v_); }
  bool is_gl() const { return std::holds_alternative<GLWalkModel>(v_); }
  const LinearModel& as_linear() const;
  const HolderModel& as_holder() const;
  const DoublingModel& as_doubling() const;
  const GLWalkModel& as_gl() const;

  // Law of the innovation stream feeding evaluate / sample_path.
  InnovationLaw law() const;
  // Window depth needed by evaluate (0 for the GL walk, which has no window form).
  std::size_t required_depth() const;
  double centering() const { return centering_; }
  ProcessModel with_centering(double offset) const;
  ProcessModel with_gl_centering(std::vector<double> step_means, double stationary_mean) const;
  std::string describe() const;

  double evaluate(const InnovationWindow& w) const;
  // Same value read from a time-ascending buffer: at_k[-j] = eps_{k-j}. No law or depth checks.
  double evaluate_ascending(const double* at_k) const;

 private:
  explicit ProcessModel(Variant v) : v_(std::move(v)) {}
  template <class Access>
  double evaluate_with(Access eps) const;
  Variant v_;
  double centering_ = 0.0;
};

// Innovation stream of a model under an experiment seed.
CoupledStream model_stream(const ProcessModel& model, std::uint64_t seed);

// X_1..X_n for one replication.
std::vector<double> sample_path(const ProcessModel& model, std::uint64_t seed, std::uint64_t replication,
                                std::size_t n);
// Same path driven by an explicit series (base or prime).
std::vector<double> sample_path(const ProcessModel& model, const CoupledStream& stream, std::uint64_t replication,
                                Series series, std::size_t n);

// log-gains log|g_k ... g_1 x| increments for a GL walk started at x (no centering).
std::vector<double> gl_log_gains(const GLWalkModel& model, const CoupledStream& stream, std::uint64_t replication,
                                 std::size_t n, const std::vector<double>& start);

// Upper bound on ||X_k - X_k^{J-truncated}||_2.
double truncation_error(const ProcessModel& model, std::size_t J);

// m-dependent approximation E[X_k | eps_k..eps_{k-m+1}]; K tail draws for the Hoelder variant.
ProcessModel m_project(const ProcessModel& model, std::size_t m, std::size_t K = 10000, std::uint64_t seed = 0);

// Estimate and subtract the mean of X_k (Monte Carlo pre-pass unless exact).
ProcessModel center_model(const ProcessModel& model, std::uint64_t seed, std::size_t R = 20000);

// Raw observable values, exposed for oracles.
double doubling_observable(DoublingFn f, double x);
double holder_observable(HolderFn f, double beta, double y);
// f(x), or its conditional mean over the dyadic cell of width 2^-projection containing x.
double doubling_model_value(const DoublingModel& model, double x);

}  // namespace weakdep
