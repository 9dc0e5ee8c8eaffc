#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "weakdep/blocks.hpp"
#include "weakdep/cli.hpp"
#include "weakdep/dependence.hpp"
#include "weakdep/rates.hpp"
#include "config_fields.hpp"

namespace weakdep {

using nlohmann::json;

ConfigError::ConfigError(std::string field, const std::string& message)
    : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

std::string to_string(Task t) {
  switch (t) {
    case Task::depcoef: return "depcoef";
    case Task::variance: return "variance";
    case Task::bedist: return "bedist";
    case Task::rate: return "rate";
    case Task::blocks: return "blocks";
    case Task::counterexample: return "counterexample";
    case Task::assumptions: return "assumptions";
  }
  return "rate";
}

Task task_from_string(const std::string& name) {
  for (Task t : {Task::depcoef, Task::variance, Task::bedist, Task::rate, Task::blocks, Task::counterexample,
                 Task::assumptions}) {
    if (to_string(t) == name) return t;
  }
  throw ConfigError("task", "unknown task '" + name + "'");
}

namespace {

using namespace config_detail;

CoefficientScheme build_scheme(const json& spec, const std::string& path) {
  const Fields f(spec, path);
  const std::string kind = f.text("kind");
  return with_field(path, [&] {
    if (kind == "identity") {
      f.only({"kind"});
      return CoefficientScheme::identity();
    }
    if (kind == "power-law") {
      f.only({"kind", "a"});
      return CoefficientScheme::power_law(f.number("a"));
    }
    if (kind == "geometric") {
      f.only({"kind", "rho"});
      return CoefficientScheme::geometric(f.number("rho"));
    }
    if (kind == "difference-power") {
      f.only({"kind", "beta"});
      return CoefficientScheme::difference_power(f.number("beta"));
    }
    if (kind == "difference-log") {
      f.only({"kind"});
      return CoefficientScheme::difference_log();
    }
    if (kind == "list") {
      f.only({"kind", "alphas"});
      const json& a = f.raw("alphas");
      if (!a.is_array()) throw ConfigError(f.at("alphas"), "expected a number array");
      std::vector<double> alphas;
      for (const auto& v : a) {
        if (!v.is_number()) throw ConfigError(f.at("alphas"), "expected a number array");
        alphas.push_back(v.get<double>());
      }
      return CoefficientScheme::from_list(alphas);
    }
    throw ConfigError(f.at("kind"), "unknown coefficient scheme '" + kind + "'");
  });
}

void validate_normalizations(const Fields& f) {
  if (!f.has("normalization")) return;
  for (const auto& s : f.texts("normalization")) {
    with_field(f.at("normalization"), [&] { return normalization_from_string(s); });
  }
}

// Module preconditions checked before any work starts.
void validate_params(const ExperimentConfig& cfg, const ProcessModel& model) {
  const Fields f(cfg.params, "params");
  const auto R_ok = [&](std::size_t min, std::size_t fallback) {
    const std::size_t R = f.count("R", fallback);
    require(R >= min, f.at("R"), "needs R >= " + std::to_string(min));
  };
  switch (cfg.task) {
    case Task::depcoef: {
      f.only({"L", "lags", "p", "R", "mode", "kmax"});
      const double p = f.number("p", 2.0);
      require(p >= 1.0, f.at("p"), "needs p >= 1");
      if (model.is_gl()) {
        require(f.count("kmax", 20) >= 1, f.at("kmax"), "needs kmax >= 1");
        R_ok(2, 10000);
        break;
      }
      const std::string mode = f.text("mode", "auto");
      if (mode != "auto" && mode != "closed-form" && mode != "monte-carlo") {
        throw ConfigError(f.at("mode"), "expected auto, closed-form or monte-carlo");
      }
      if (mode == "monte-carlo" || (mode == "auto" && !model.is_linear())) R_ok(1000, 10000);
      if (f.has("lags")) {
        for (auto l : f.integers("lags")) require(l >= 1, f.at("lags"), "lags must be positive");
      }
      break;
    }
    case Task::variance: {
      f.only({"n", "m", "K", "R"});
      require(f.integer("n", 1024) >= 1, f.at("n"), "needs n >= 1");
      require(f.integer("m", 0) >= 0, f.at("m"), "needs m >= 0");
      require(f.count("K", 64) >= 1, f.at("K"), "needs K >= 1");
      if (model.is_gl()) require(f.integer("m", 0) == 0, f.at("m"), "the GL walk has no m-projection");
      break;
    }
    case Task::bedist:
    case Task::rate:
    case Task::counterexample: {
      f.only({"n", "grid", "R", "normalization", "method", "delta_conf", "ss2", "level"});
      validate_normalizations(f);
      const double dc = f.number("delta_conf", 0.01);
      require(dc > 0.0 && dc < 1.0, f.at("delta_conf"), "needs 0 < delta_conf < 1");
      if (f.has("ss2")) require(f.number("ss2") > 0.0, f.at("ss2"), "needs ss2 > 0");
      const double level = f.number("level", 0.95);
      require(level > 0.0 && level < 1.0, f.at("level"), "needs 0 < level < 1");
      const std::string method = f.text("method", "auto");
      const RateMethod rm = with_field(f.at("method"), [&] { return rate_method_from_string(method); });
      const bool gaussian_linear = model.is_linear() && model.law().kind == InnovationKind::standard_gaussian;
      if (cfg.task == Task::counterexample || rm == RateMethod::gaussian_closed_form) {
        require(gaussian_linear, "model", "closed-form Delta_n needs a linear model with Gaussian innovations");
      }
      const bool empirical = rm == RateMethod::empirical || (rm == RateMethod::automatic && !gaussian_linear);
      if (empirical) R_ok(1000, 100000);
      if (cfg.task == Task::bedist) {
        for (auto n : f.integers("n")) require(n >= 1, f.at("n"), "needs n >= 1");
      } else {
        const auto grid = grid_field(f, "grid", cfg.task == Task::counterexample ? 8 : 6,
                                     cfg.task == Task::counterexample ? 18 : 14);
        require(grid.size() >= 4, f.at("grid"), "needs at least 4 grid points");
        for (std::size_t i = 0; i < grid.size(); ++i) {
          const auto n = grid[i];
          require(n >= 1 && (n & (n - 1)) == 0, f.at("grid"), "grid points must be powers of two");
          require(i == 0 || n > grid[i - 1], f.at("grid"), "grid must be strictly increasing");
        }
      }
      break;
    }
    case Task::blocks: {
      f.only({"n", "m", "mode", "K", "R", "replications", "factor", "projection_K"});
      require(!model.is_gl(), "model", "block diagnostics need an m-projection, which the GL walk lacks");
      const std::string mode = f.text("mode", model.is_linear() ? "exact-linear" : "nested-mc");
      if (mode != "exact-linear" && mode != "nested-mc") {
        throw ConfigError(f.at("mode"), "expected exact-linear or nested-mc");
      }
      require(mode == "nested-mc" || model.is_linear(), f.at("mode"), "exact-linear mode requires a linear model");
      const auto n = f.integer("n");
      for (auto m : f.integers("m")) {
        with_field(f.at("m"), [&] { return make_layout(n, m); });
      }
      if (mode == "nested-mc") require(f.count("K", 10000) >= 2, f.at("K"), "needs K >= 2");
      const std::size_t R = f.count("R", 10000);
      require(R == 0 || R >= 1000, f.at("R"), "needs R = 0 (skip) or R >= 1000");
      require(f.count("replications", 1) >= 1, f.at("replications"), "needs at least one replication");
      require(f.number("factor", 0.125) > 0.0, f.at("factor"), "needs factor > 0");
      break;
    }
    case Task::assumptions: {
      f.only({"p", "a", "b", "L", "R", "mode", "tail_fraction", "level"});
      with_field("params", [&] {
        return AssumptionSpec(f.number("p"), f.number("a"), f.number("b"), f.number("tail_fraction", 0.5),
                              f.number("level", 0.95));
      });
      require(!model.is_gl(), "model", "assumption checks need filter coefficients; use depcoef for the GL walk");
      require(f.count("L", 8) >= 7, f.at("L"), "needs L >= 7 (at least 8 dyadic lags)");
      const std::string mode = f.text("mode", "auto");
      if (mode != "auto" && mode != "closed-form" && mode != "monte-carlo") {
        throw ConfigError(f.at("mode"), "expected auto, closed-form or monte-carlo");
      }
      if (mode == "monte-carlo" || (mode == "auto" && !model.is_linear())) R_ok(1000, 10000);
      break;
    }
  }
}

}  // namespace

ProcessModel build_model(const json& spec, std::uint64_t seed) {
  const Fields f(spec, "model");
  const std::string variant = f.text("variant");
  if (variant == "linear") {
    f.only({"variant", "scheme", "innovation", "depth"});
    const auto scheme = build_scheme(f.raw("scheme"), "model.scheme");
    const auto law = law_field(f, "gaussian");
    const auto depth = f.count("depth", 0);
    return with_field("model", [&] { return ProcessModel::linear(scheme, law, depth); });
  }
  if (variant == "holder") {
    f.only({"variant", "scheme", "innovation", "depth", "f", "beta", "centering_R"});
    const auto scheme = build_scheme(f.raw("scheme"), "model.scheme");
    const auto law = law_field(f, "gaussian");
    const auto fn = with_field(f.at("f"), [&] { return holder_fn_from_string(f.text("f", "cos-shift")); });
    const double beta = f.number("beta", 1.0);
    const auto depth = f.count("depth", 0);
    const auto m = with_field("model", [&] { return ProcessModel::holder_of_linear(scheme, law, fn, beta, depth); });
    return with_field("model", [&] { return center_model(m, seed, f.count("centering_R", 20000)); });
  }
  if (variant == "doubling") {
    f.only({"variant", "f", "depth"});
    const auto fn = with_field(f.at("f"), [&] { return doubling_fn_from_string(f.text("f", "cos2pi")); });
    const auto depth = f.count("depth", 64);
    return with_field("model", [&] { return ProcessModel::doubling(fn, depth); });
  }
  if (variant == "gl-walk") {
    f.only({"variant", "d", "lambda_max", "spread", "start", "centering_R"});
    const auto d = static_cast<int>(f.integer("d", 2));
    const double lmax = f.number("lambda_max", 1.0);
    const double spread = f.number("spread", 3.14159265358979323846);
    std::vector<double> start;
    if (f.has("start")) {
      const json& s = f.raw("start");
      if (!s.is_array()) throw ConfigError(f.at("start"), "expected a number array");
      for (const auto& v : s) {
        if (!v.is_number()) throw ConfigError(f.at("start"), "expected a number array");
        start.push_back(v.get<double>());
      }
    }
    const auto m = with_field("model", [&] { return ProcessModel::gl_walk(d, lmax, spread, start); });
    return with_field("model", [&] { return center_model(m, seed, f.count("centering_R", 20000)); });
  }
  throw ConfigError(f.at("variant"), "unknown model variant '" + variant + "'");
}

ExperimentConfig parse_config(const json& doc) {
  const Fields f(doc, "");
  f.only({"name", "seed", "task", "model", "params", "output", "threads"});
  ExperimentConfig cfg;
  cfg.name = f.text("name", "experiment");
  if (f.has("seed")) {
    const json& s = f.raw("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      throw ConfigError("seed", "expected a non-negative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  cfg.task = task_from_string(f.text("task"));
  cfg.model = f.raw("model");
  cfg.params = f.has("params") ? f.raw("params") : json::object();
  if (!cfg.params.is_object()) throw ConfigError("params", "expected an object");
  if (f.has("output")) cfg.output = f.text("output");
  const auto threads = f.integer("threads", 1);
  if (threads < 1) throw PreconditionError("threads: needs at least one thread");
  cfg.threads = static_cast<unsigned>(threads);
  // Validation skips the centering pre-pass.
  json shape = cfg.model;
  if (shape.is_object() && shape.contains("variant") &&
      (shape["variant"] == "holder" || shape["variant"] == "gl-walk")) {
    shape["centering_R"] = 2;
  }
  validate_params(cfg, build_model(shape, cfg.seed));
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& cfg) {
  json out = {{"name", cfg.name}, {"seed", cfg.seed},     {"task", to_string(cfg.task)},
              {"model", cfg.model}, {"params", cfg.params}, {"threads", cfg.threads}};
  if (cfg.output) out["output"] = *cfg.output;
  return out;
}

std::string config_digest(const ExperimentConfig& cfg) {
  json canon = to_json(cfg);
  canon.erase("output");
  canon.erase("threads");
  const std::string text = canon.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = {
      {"doubling-cos", "doubling map with f = cos 2 pi x; Monte Carlo Delta_n over 2^6..2^14",
       {{"name", "doubling-cos"},
        {"seed", 20240501},
        {"task", "rate"},
        {"model", {{"variant", "doubling"}, {"f", "cos2pi"}}},
        {"params", {{"grid", {{"lo", 6}, {"hi", 14}}}, {"R", 100000}, {"normalization", "sqrt-n-ss2"}, {"ss2", 0.5}}}}},
      {"gl2-walk", "log-norm increments of a GL_2 walk with narrow rotations; Monte Carlo Delta_n over 2^6..2^12",
       {{"name", "gl2-walk"},
        {"seed", 20240502},
        {"task", "rate"},
        {"model", {{"variant", "gl-walk"}, {"d", 2}, {"lambda_max", 0.25}, {"spread", 0.02}}},
        {"params", {{"grid", {{"lo", 6}, {"hi", 12}}}, {"R", 10000}, {"normalization", "sqrt-n-ss2"}}}}},
      {"counterexample-1.3", "alpha_j = j^-1.3 with Gaussian innovations; closed-form Delta_n over 2^8..2^18",
       {{"name", "counterexample-1.3"},
        {"seed", 1},
        {"task", "counterexample"},
        {"model", {{"variant", "linear"}, {"scheme", {{"kind", "power-law"}, {"a", 1.3}}}, {"innovation", "gaussian"}}},
        {"params", {{"grid", {{"lo", 8}, {"hi", 18}}}}}}},
      {"cancellation-beta-0.25",
       "difference scheme a_j = j^-0.25 with Rademacher innovations; Monte Carlo Delta_n under sqrt(E S_n^2)",
       {{"name", "cancellation-beta-0.25"},
        {"seed", 20240504},
        {"task", "rate"},
        {"model",
         {{"variant", "linear"},
          {"scheme", {{"kind", "difference-power"}, {"beta", 0.25}}},
          {"innovation", "rademacher"},
          {"depth", 16384}}},
        {"params", {{"grid", {{"lo", 6}, {"hi", 14}}}, {"R", 100000}, {"normalization", "sqrt-ESn2"}}}}},
      {"holder-of-linear", "cos(Y + pi/4) of a power-law (a = 3) Gaussian linear process; assumption check from Monte Carlo",
       {{"name", "holder-of-linear"},
        {"seed", 20240505},
        {"task", "assumptions"},
        {"model",
         {{"variant", "holder"},
          {"scheme", {{"kind", "power-law"}, {"a", 3.0}}},
          {"innovation", "gaussian"},
          {"depth", 256},
          {"f", "cos-shift"}}},
        {"params", {{"p", 2.0}, {"a", 1.0}, {"b", 1.0}, {"L", 7}, {"R", 20000}, {"mode", "monte-carlo"}}}}},
  };
  return all;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  throw ConfigError("preset", "unknown preset '" + name + "'");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const PreconditionError*>(&e)) return 3;
  if (dynamic_cast<const DegenerateVarianceError*>(&e)) return 4;
  return 1;
}

json error_record(const std::exception& e) {
  const int code = exit_code_for(e);
  const char* kind = code == 2 ? "parse" : code == 3 ? "precondition" : code == 4 ? "degenerate-variance" : "runtime";
  json rec = {{"error", {{"kind", kind}, {"exit_code", code}, {"message", e.what()}}}};
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e); ce && !ce->field().empty()) {
    rec["error"]["field"] = ce->field();
  }
  return rec;
}

}  // namespace weakdep
