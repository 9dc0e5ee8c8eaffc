#include "weakdep/processes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "weakdep/errors.hpp"
#include "weakdep/glwalk.hpp"

namespace weakdep {

namespace {

constexpr double two_pow_64_inv = 5.42101086242752217003726400434970855712890625e-20;

// 16-point Gauss-Legendre on [-1,1].
constexpr std::array<double, 8> gl_nodes = {0.0950125098376374401853193, 0.2816035507792589132304605,
                                            0.4580167776572273863424194, 0.6178762444026437484466718,
                                            0.7554044083550030338951012, 0.8656312023878317438804679,
                                            0.9445750230732325760779884, 0.9894009349916499325961542};
constexpr std::array<double, 8> gl_weights = {0.1894506104550684962853967, 0.1826034150449235888667637,
                                              0.1691565193950025381893121, 0.1495959888165767320815017,
                                              0.1246289712555338720524763, 0.0951585116824927848099251,
                                              0.0622535239386478928628438, 0.0271524594117540948517806};

double projected_doubling(DoublingFn f, double x_m, double h) {
  double acc = 0.0;
  const double mid = x_m + 0.5 * h;
  for (std::size_t i = 0; i < gl_nodes.size(); ++i) {
    const double dx = 0.5 * h * gl_nodes[i];
    acc += gl_weights[i] * (doubling_observable(f, mid - dx) + doubling_observable(f, mid + dx));
  }
  return 0.5 * acc;
}

double holder_constant(HolderFn f) { return f == HolderFn::cube_clip ? 3.0 : 1.0; }

double doubling_lipschitz(DoublingFn f) {
  switch (f) {
    case DoublingFn::cos2pi: return 2.0 * std::numbers::pi;
    case DoublingFn::centered_x: return 1.0;
    case DoublingFn::indicator_half: return 0.0;
  }
  return 0.0;
}

std::size_t policy_depth(const CoefficientScheme& scheme, std::size_t depth) {
  if (depth > 0) return depth;
  if (scheme.finite()) return scheme.support();
  return scheme.depth_for(default_truncation_tol);
}


double holder_value(const HolderModel& h, double head) {
  if (h.projection == 0) return holder_observable(h.f, h.beta, head);
  double acc = 0.0;
  for (double t : h.tail_samples) acc += holder_observable(h.f, h.beta, head + t);
  return acc / static_cast<double>(h.tail_samples.size());
}

// X_k = sum_j alphas[j] eps_{k-j}, k = 1..n, for the first `count` coefficients.
std::vector<double> convolve_path(const std::vector<double>& alphas, std::size_t count, const CoupledStream& stream,
                                  std::uint64_t rep, Series series, std::size_t n) {
  const std::size_t J = std::max<std::size_t>(count, 1);
  std::vector<double> eps(n + J - 1);
  stream.fill(rep, series, 2 - static_cast<std::int64_t>(J), eps);
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double* e = eps.data() + k + J - 1;
    double acc = 0.0;
    for (std::size_t j = 0; j < count; ++j) acc += alphas[j] * e[-static_cast<std::ptrdiff_t>(j)];
    out[k] = acc;
  }
  return out;
}

void check_law(const InnovationWindow& w, const InnovationLaw& law) {
  if (!(w.law() == law)) throw PreconditionError("window law does not match model law");
}

void check_depth(const InnovationWindow& w, std::size_t need) {
  if (w.depth() < need) {
    throw PreconditionError("window depth " + std::to_string(w.depth()) + " below model depth " +
                            std::to_string(need));
  }
}

}  // namespace

std::string to_string(DoublingFn f) {
  switch (f) {
    case DoublingFn::cos2pi: return "cos2pi";
    case DoublingFn::centered_x: return "centered-x";
    case DoublingFn::indicator_half: return "indicator-half";
  }
  return "?";
}

std::string to_string(HolderFn f) {
  switch (f) {
    case HolderFn::cos_shift: return "cos-shift";
    case HolderFn::abs_center: return "abs-center";
    case HolderFn::cube_clip: return "cube-clip";
  }
  return "?";
}

DoublingFn doubling_fn_from_string(const std::string& name) {
  if (name == "cos2pi") return DoublingFn::cos2pi;
  if (name == "centered-x") return DoublingFn::centered_x;
  if (name == "indicator-half") return DoublingFn::indicator_half;
  throw PreconditionError("unknown doubling observable '" + name + "'");
}

HolderFn holder_fn_from_string(const std::string& name) {
  if (name == "cos-shift") return HolderFn::cos_shift;
  if (name == "abs-center") return HolderFn::abs_center;
  if (name == "cube-clip") return HolderFn::cube_clip;
  throw PreconditionError("unknown Hoelder observable '" + name + "'");
}

double doubling_observable(DoublingFn f, double x) {
  switch (f) {
    case DoublingFn::cos2pi: return std::cos(2.0 * std::numbers::pi * x);
    case DoublingFn::centered_x: return x - 0.5;
    case DoublingFn::indicator_half: return (x < 0.5 ? 1.0 : 0.0) - 0.5;
  }
  return 0.0;
}

double holder_observable(HolderFn f, double beta, double y) {
  switch (f) {
    case HolderFn::cos_shift: return std::cos(y + 0.25 * std::numbers::pi);
    case HolderFn::abs_center: return std::pow(std::fabs(y), beta);
    case HolderFn::cube_clip: {
      const double c = std::clamp(y, -1.0, 1.0);
      return c * c * c;
    }
  }
  return 0.0;
}

double doubling_model_value(const DoublingModel& model, double x) {
  if (model.projection == 0) return doubling_observable(model.f, x);
  const double h = std::ldexp(1.0, -static_cast<int>(model.projection));
  return projected_doubling(model.f, std::floor(x / h) * h, h);
}

ProcessModel ProcessModel::linear(CoefficientScheme scheme, InnovationLaw law, std::size_t depth) {
  if (law.kind == InnovationKind::raw_bit) throw PreconditionError("linear models need centered innovations");
  LinearModel m;
  m.depth = policy_depth(scheme, depth);
  m.alphas = scheme.head(m.depth);
  m.scheme = std::move(scheme);
  m.law = law;
  return ProcessModel(std::move(m));
}

ProcessModel ProcessModel::holder_of_linear(CoefficientScheme scheme, InnovationLaw law, HolderFn f, double beta,
                                            std::size_t depth) {
  if (law.kind == InnovationKind::raw_bit) throw PreconditionError("Hoelder models need centered innovations");
  if (!(beta > 0.0 && beta <= 1.0)) throw PreconditionError("Hoelder exponent must lie in (0,1]");
  if (f != HolderFn::abs_center && beta != 1.0) {
    throw PreconditionError(to_string(f) + " is Lipschitz; Hoelder exponent must be 1");
  }
  HolderModel m;
  m.depth = policy_depth(scheme, depth);
  m.alphas = scheme.head(m.depth);
  m.scheme = std::move(scheme);
  m.law = law;
  m.f = f;
  m.beta = beta;
  m.c = holder_constant(f);
  return ProcessModel(std::move(m));
}

ProcessModel ProcessModel::doubling(DoublingFn f, std::size_t depth) {
  if (depth < 1 || depth > 64) throw PreconditionError("doubling-map depth must lie in [1,64]");
  DoublingModel m;
  m.f = f;
  m.depth = depth;
  return ProcessModel(m);
}

ProcessModel ProcessModel::gl_walk(int d, double lambda_max, double spread, std::vector<double> start) {
  if (d < 2) throw PreconditionError("GL walk dimension must be at least 2");
  if (!(lambda_max >= 0.0)) throw PreconditionError("lambda_max must be nonnegative");
  if (!(spread >= 0.0 && spread <= std::numbers::pi)) throw PreconditionError("rotation spread must lie in [0,pi]");
  GLWalkModel m;
  m.d = d;
  m.lambda_max = lambda_max;
  m.spread = spread;
  if (start.empty()) {
    start.assign(static_cast<std::size_t>(d), 0.0);
    start[0] = 1.0;
  }
  if (start.size() != static_cast<std::size_t>(d)) throw PreconditionError("start direction has wrong dimension");
  double norm = 0.0;
  for (double v : start) norm += v * v;
  norm = std::sqrt(norm);
  if (!(norm > 0.0)) throw PreconditionError("start direction must be nonzero");
  for (double& v : start) v /= norm;
  m.start = std::move(start);
  return ProcessModel(std::move(m));
}

const LinearModel& ProcessModel::as_linear() const {
  if (!is_linear()) throw UnsupportedError("model is not linear");
  return std::get<LinearModel>(v_);
}
const HolderModel& ProcessModel::as_holder() const {
  if (!is_holder()) throw UnsupportedError("model is not Hoelder-of-linear");
  return std::get<HolderModel>(v_);
}
const DoublingModel& ProcessModel::as_doubling() const {
  if (!is_doubling()) throw UnsupportedError("model is not a doubling-map observable");
  return std::get<DoublingModel>(v_);
}
const GLWalkModel& ProcessModel::as_gl() const {
  if (!is_gl()) throw UnsupportedError("model is not a GL walk");
  return std::get<GLWalkModel>(v_);
}

InnovationLaw ProcessModel::law() const {
  if (is_linear()) return as_linear().law;
  if (is_holder()) return as_holder().law;
  if (is_doubling()) return {InnovationKind::raw_bit};
  return {InnovationKind::centered_uniform};
}

std::size_t ProcessModel::required_depth() const {
  if (is_linear()) return as_linear().depth;
  if (is_holder()) {
    const auto& h = as_holder();
    return h.projection > 0 ? h.projection : h.depth;
  }
  if (is_doubling()) {
    const auto& d = as_doubling();
    return d.projection > 0 ? d.projection : d.depth;
  }
  return 0;
}

ProcessModel ProcessModel::with_centering(double offset) const {
  ProcessModel out = *this;
  out.centering_ = offset;
  return out;
}

ProcessModel ProcessModel::with_gl_centering(std::vector<double> step_means, double stationary_mean) const {
  ProcessModel out = *this;
  auto& g = std::get<GLWalkModel>(out.v_);
  g.step_means = std::move(step_means);
  g.stationary_mean = stationary_mean;
  return out;
}

std::string ProcessModel::describe() const {
  std::ostringstream os;
  if (is_linear()) {
    const auto& m = as_linear();
    os << "linear " << m.scheme.describe() << " law=" << to_string(m.law.kind) << " depth=" << m.depth;
  } else if (is_holder()) {
    const auto& m = as_holder();
    os << "hoelder " << to_string(m.f) << " beta=" << m.beta << " " << m.scheme.describe()
       << " law=" << to_string(m.law.kind) << " depth=" << m.depth;
    if (m.projection > 0) os << " m=" << m.projection;
  } else if (is_doubling()) {
    const auto& m = as_doubling();
    os << "doubling " << to_string(m.f) << " depth=" << m.depth;
    if (m.projection > 0) os << " m=" << m.projection;
  } else {
    const auto& m = as_gl();
    os << "gl-walk d=" << m.d << " lambda_max=" << m.lambda_max << " spread=" << m.spread;
  }
  return os.str();
}

template <class Access>
double ProcessModel::evaluate_with(Access eps) const {
  if (is_linear()) {
    const auto& m = as_linear();
    double acc = 0.0;
    for (std::size_t j = 0; j < m.depth; ++j) acc += m.alphas[j] * eps(j);
    return acc - centering_;
  }
  if (is_holder()) {
    const auto& m = as_holder();
    const std::size_t count = m.projection > 0 ? m.projection : m.depth;
    double acc = 0.0;
    for (std::size_t j = 0; j < count; ++j) acc += m.alphas[j] * eps(j);
    return holder_value(m, acc) - centering_;
  }
  const auto& m = as_doubling();
  if (m.projection > 0) {
    double x = 0.0, scale = 0.5;
    for (std::size_t j = 0; j < m.projection; ++j, scale *= 0.5) x += scale * eps(j);
    return projected_doubling(m.f, x, std::ldexp(1.0, -static_cast<int>(m.projection))) - centering_;
  }
  std::uint64_t u = 0;
  for (std::size_t j = 0; j < m.depth; ++j) {
    if (eps(j) != 0.0) u |= std::uint64_t{1} << (63 - j);
  }
  return doubling_observable(m.f, static_cast<double>(u) * two_pow_64_inv) - centering_;
}

double ProcessModel::evaluate(const InnovationWindow& w) const {
  if (is_gl()) throw UnsupportedError("GL walk has no finite-window evaluation; use sample_path");
  check_law(w, law());
  check_depth(w, required_depth());
  return evaluate_with([&w](std::size_t j) { return w[j]; });
}

double ProcessModel::evaluate_ascending(const double* at_k) const {
  if (is_gl()) throw UnsupportedError("GL walk has no finite-window evaluation; use sample_path");
  return evaluate_with([at_k](std::size_t j) { return at_k[-static_cast<std::ptrdiff_t>(j)]; });
}

CoupledStream model_stream(const ProcessModel& model, std::uint64_t seed) {
  return CoupledStream(seed, model.law(), 0);
}

std::vector<double> gl_log_gains(const GLWalkModel& model, const CoupledStream& stream, std::uint64_t replication,
                                 std::size_t n, const std::vector<double>& start) {
  std::vector<double> out(n);
  const CoupledStream lam_stream = stream.child(1);
  const auto d = static_cast<std::size_t>(model.d);
  std::vector<CoupledStream> rot;
  for (std::size_t i = 0; i + 1 < d; ++i) rot.push_back(stream.child(2 + i));
  const double lmax = model.lambda_max;
  const double spread = model.spread;
  if (d == 2) {
    double theta = std::atan2(start[1], start[0]);
    for (std::size_t k = 0; k < n; ++k) {
      const auto t = static_cast<std::int64_t>(k + 1);
      const double lam = lmax * (2.0 * lam_stream.uniform(replication, Series::base, t) - 1.0);
      const double phi = spread * (2.0 * rot[0].uniform(replication, Series::base, t) - 1.0);
      const double c = std::cos(theta), s = std::sin(theta);
      const double a = std::exp(lam) * c, b = std::exp(-lam) * s;
      out[k] = 0.5 * std::log(a * a + b * b);
      theta = std::atan2(b, a) + phi;
    }
    return out;
  }
  std::vector<double> y = start;
  for (std::size_t k = 0; k < n; ++k) {
    const auto t = static_cast<std::int64_t>(k + 1);
    const double lam = lmax * (2.0 * lam_stream.uniform(replication, Series::base, t) - 1.0);
    y[0] *= std::exp(lam);
    y[1] *= std::exp(-lam);
    for (std::size_t i = 0; i + 1 < d; ++i) {
      const double phi = spread * (2.0 * rot[i].uniform(replication, Series::base, t) - 1.0);
      const double c = std::cos(phi), s = std::sin(phi);
      const double a = y[i], b = y[i + 1];
      y[i] = c * a - s * b;
      y[i + 1] = s * a + c * b;
    }
    double norm = 0.0;
    for (double v : y) norm += v * v;
    norm = std::sqrt(norm);
    out[k] = std::log(norm);
    for (double& v : y) v /= norm;
  }
  return out;
}

std::vector<double> sample_path(const ProcessModel& model, const CoupledStream& stream, std::uint64_t replication,
                                Series series, std::size_t n) {
  if (n < 1) throw PreconditionError("path length must be at least 1");
  const double c = model.centering();
  if (model.is_linear()) {
    const auto& m = model.as_linear();
    auto out = convolve_path(m.alphas, m.depth, stream, replication, series, n);
    if (c != 0.0) {
      for (double& x : out) x -= c;
    }
    return out;
  }
  if (model.is_holder()) {
    const auto& m = model.as_holder();
    const std::size_t count = m.projection > 0 ? m.projection : m.depth;
    auto out = convolve_path(m.alphas, count, stream, replication, series, n);
    for (double& x : out) x = holder_value(m, x) - c;
    return out;
  }
  if (model.is_doubling()) {
    const auto& m = model.as_doubling();
    std::vector<double> out(n);
    const std::size_t J = m.projection > 0 ? m.projection : m.depth;
    const std::uint64_t keep = J >= 64 ? ~std::uint64_t{0} : ~((std::uint64_t{1} << (64 - J)) - 1);
    std::uint64_t u = 0;
    for (std::int64_t t = 2 - 64; t <= 0; ++t) {
      u = (u >> 1) | (static_cast<std::uint64_t>(stream.bit(replication, series, t)) << 63);
    }
    for (std::size_t k = 0; k < n; ++k) {
      const auto t = static_cast<std::int64_t>(k + 1);
      u = (u >> 1) | (static_cast<std::uint64_t>(stream.bit(replication, series, t)) << 63);
      const double x = static_cast<double>(u & keep) * two_pow_64_inv;
      out[k] = (m.projection > 0 ? projected_doubling(m.f, x, std::ldexp(1.0, -static_cast<int>(m.projection)))
                                 : doubling_observable(m.f, x)) -
               c;
    }
    return out;
  }
  const auto& g = model.as_gl();
  auto out = gl_log_gains(g, series == Series::base ? stream : stream.child(0x5052494D45ULL), replication, n,
                          g.start);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] -= k < g.step_means.size() ? g.step_means[k] : g.stationary_mean;
  }
  return out;
}

std::vector<double> sample_path(const ProcessModel& model, std::uint64_t seed, std::uint64_t replication,
                                std::size_t n) {
  return sample_path(model, model_stream(model, seed), replication, Series::base, n);
}

double truncation_error(const ProcessModel& model, std::size_t J) {
  if (model.is_linear()) return std::sqrt(model.as_linear().scheme.tail_square_sum(J));
  if (model.is_holder()) {
    const auto& h = model.as_holder();
    return h.c * std::pow(h.scheme.tail_square_sum(J), h.beta / 2.0);
  }
  if (model.is_doubling()) {
    const auto& d = model.as_doubling();
    if (d.f == DoublingFn::indicator_half) return J >= 1 ? 0.0 : 1.0;
    return doubling_lipschitz(d.f) * std::ldexp(1.0, -static_cast<int>(J));
  }
  throw UnsupportedError("truncation error is not defined for the GL walk (finite dependence on eps_1..eps_k)");
}

ProcessModel ProcessModel::from_variant(Variant v, double centering) {
  ProcessModel out(std::move(v));
  out.centering_ = centering;
  return out;
}

ProcessModel m_project(const ProcessModel& model, std::size_t m, std::size_t K, std::uint64_t seed) {
  if (m < 1) throw PreconditionError("projection order m must be at least 1");
  if (model.is_linear()) {
    const auto& lin = model.as_linear();
    if (m >= lin.depth) return model;
    LinearModel out = lin;
    out.depth = m;
    out.alphas.resize(m);
    out.scheme = CoefficientScheme::from_list(out.alphas);
    return ProcessModel::from_variant(out, model.centering());
  }
  if (model.is_doubling()) {
    const auto& d = model.as_doubling();
    if (m >= d.depth) return model;
    DoublingModel out = d;
    out.projection = m;
    return ProcessModel::from_variant(out, model.centering());
  }
  if (model.is_holder()) {
    const auto& h = model.as_holder();
    if (m >= h.depth) return model;
    if (K < 1) throw PreconditionError("projection needs at least one tail draw");
    HolderModel out = h;
    out.projection = m;
    out.tail_samples.assign(K, 0.0);
    const CoupledStream tails(seed, h.law, 0x7461696C73ULL);
    std::vector<double> eta(h.depth - m);
    for (std::size_t i = 0; i < K; ++i) {
      tails.fill(i, Series::base, static_cast<std::int64_t>(m), eta);
      double acc = 0.0;
      for (std::size_t j = m; j < h.depth; ++j) acc += h.alphas[j] * eta[j - m];
      out.tail_samples[i] = acc;
    }
    return ProcessModel::from_variant(out, model.centering());
  }
  throw UnsupportedError("m-projection is not available for the GL walk");
}

ProcessModel center_model(const ProcessModel& model, std::uint64_t seed, std::size_t R) {
  if (R < 2) throw PreconditionError("centering pre-pass needs R >= 2");
  if (model.is_linear() || model.is_doubling()) return model.with_centering(0.0);
  const CoupledStream prepass(seed, model.law(), 0x63656E746572ULL);
  if (model.is_holder()) {
    const auto& h = model.as_holder();
    if (h.law.kind == InnovationKind::standard_gaussian) {
      const std::size_t count = h.projection > 0 ? h.projection : h.depth;
      double v = 0.0;
      for (std::size_t j = 0; j < count; ++j) v += h.alphas[j] * h.alphas[j];
      if (h.f == HolderFn::cube_clip && h.projection == 0) return model.with_centering(0.0);
      if (h.f == HolderFn::abs_center && h.projection == 0) {
        const double b = h.beta;
        return model.with_centering(std::pow(2.0 * v, b / 2.0) * std::tgamma((b + 1.0) / 2.0) /
                                    std::sqrt(std::numbers::pi));
      }
      if (h.f == HolderFn::cos_shift) {
        if (h.projection == 0) return model.with_centering(std::cos(0.25 * std::numbers::pi) * std::exp(-v / 2.0));
        double acc = 0.0;
        for (double t : h.tail_samples) acc += std::cos(t + 0.25 * std::numbers::pi);
        return model.with_centering(std::exp(-v / 2.0) * acc / static_cast<double>(h.tail_samples.size()));
      }
    }
    const ProcessModel raw = model.with_centering(0.0);
    double acc = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      acc += raw.evaluate(draw_window(prepass, r, Series::base, 0, raw.required_depth()));
    }
    return model.with_centering(acc / static_cast<double>(R));
  }
  const auto& g = model.as_gl();
  if (g.d == 2) {
    const ProjectiveChain2 chain(g);
    if (chain.converged()) return model.with_gl_centering(chain.transient_means(), chain.stationary_mean());
  }
  constexpr std::size_t burn_in = 64;
  std::vector<double> means(burn_in, 0.0);
  for (std::size_t r = 0; r < R; ++r) {
    const auto gains = gl_log_gains(g, prepass, r, burn_in, g.start);
    for (std::size_t k = 0; k < burn_in; ++k) means[k] += gains[k];
  }
  for (double& v : means) v /= static_cast<double>(R);
  double stationary = 0.0;
  for (std::size_t k = burn_in / 2; k < burn_in; ++k) stationary += means[k];
  stationary /= static_cast<double>(burn_in - burn_in / 2);
  return model.with_gl_centering(std::move(means), stationary);
}

}  // namespace weakdep
