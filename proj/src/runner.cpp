#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>

#include "config_fields.hpp"
#include "weakdep/bedistance.hpp"
#include "weakdep/blocks.hpp"
#include "weakdep/cli.hpp"
#include "weakdep/dependence.hpp"
#include "weakdep/rates.hpp"
#include "weakdep/variance.hpp"

namespace weakdep {

using nlohmann::json;
namespace fs = std::filesystem;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> emit_plotdata(const std::vector<PlotCurve>& curves, const fs::path& dir,
                                       std::vector<std::string>* warnings) {
  std::vector<std::string> files;
  const auto write = [&](const std::string& name, const PlotCurve& c, const std::vector<std::vector<double>>& rows,
                         const char* comment) {
    std::ofstream out(dir / name);
    out << "# " << c.name << comment << "\n#";
    for (const auto& col : c.columns) out << ' ' << col;
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << format_real(row[i]);
      out << '\n';
    }
    if (!out) throw Error("cannot write " + (dir / name).string());
    files.push_back(name);
  };
  for (const auto& c : curves) {
    if (c.rows.empty() && c.censored.empty()) {
      if (warnings) warnings->push_back("curve '" + c.name + "' has no rows; no plot file written");
      continue;
    }
    write(c.name + ".dat", c, c.rows, "");
    if (!c.censored.empty()) write(c.name + ".censored.dat", c, c.censored, " (censored or zero rows)");
  }
  if (curves.empty() && warnings) warnings->push_back("empty result set; no plot files written");
  return files;
}

json to_json(const RunManifest& m) {
  json outs = json::array();
  for (const auto& o : m.outputs) {
    outs.push_back({{"file", o.file}, {"kind", o.kind}, {"rep_begin", o.rep_begin}, {"rep_end", o.rep_end}});
  }
  return {{"config_digest", m.digest}, {"version", m.version}, {"started", m.started},
          {"finished", m.finished},    {"seed", m.seed},        {"task", m.task},
          {"outputs", outs},           {"warnings", m.warnings}};
}

fs::path resolve_output_dir(const ExperimentConfig& cfg, const std::optional<std::string>& flag) {
  if (flag) return *flag;
  if (cfg.output) return *cfg.output;
  if (const char* env = std::getenv(output_env_var); env && *env) return env;
  return "weakdep-out";
}

namespace {

using namespace config_detail;

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Writer {
 public:
  Writer(fs::path dir, RunManifest& manifest) : dir_(std::move(dir)), manifest_(manifest) {}

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows, std::uint64_t rb = 0, std::uint64_t re = 0) {
    std::ofstream out(dir_ / name, std::ios::binary);
    const auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_field(cells[i]);
      out << "\r\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
    finish(out, name, "csv", rb, re);
  }

  void json_file(const std::string& name, const json& doc, std::uint64_t rb = 0, std::uint64_t re = 0) {
    std::ofstream out(dir_ / name, std::ios::binary);
    out << doc.dump(2) << '\n';
    finish(out, name, "json", rb, re);
  }

  void plots(const std::vector<PlotCurve>& curves, std::uint64_t rb = 0, std::uint64_t re = 0) {
    for (const auto& f : emit_plotdata(curves, dir_, &manifest_.warnings)) {
      const bool side = f.find(".censored.") != std::string::npos;
      manifest_.outputs.push_back({f, side ? "sidecar" : "plot", rb, re});
    }
  }

 private:
  void finish(std::ofstream& out, const std::string& name, const char* kind, std::uint64_t rb, std::uint64_t re) {
    out.close();
    if (!out) throw Error("cannot write " + (dir_ / name).string());
    manifest_.outputs.push_back({name, kind, rb, re});
  }

  fs::path dir_;
  RunManifest& manifest_;
};

std::string R_str(std::size_t v) { return std::to_string(v); }

json fit_json(const RateFit& f) {
  return {{"slope", f.slope},
          {"intercept", f.intercept},
          {"slope_stderr", f.slope_stderr},
          {"r_squared", f.r_squared},
          {"level", f.level},
          {"ci_low", f.ci_low},
          {"ci_high", f.ci_high},
          {"n", f.n},
          {"delta", f.delta},
          {"weighting", f.weighting},
          {"excluded", f.excluded},
          {"note", f.note}};
}

std::vector<std::string> estimate_row(const BEEstimate& e) {
  return {std::to_string(e.n),
          to_string(e.normalization),
          format_real(e.delta),
          format_real(e.low),
          format_real(e.high),
          to_string(e.method),
          R_str(e.R),
          std::to_string(e.seed),
          std::to_string(e.rep_begin),
          std::to_string(e.rep_begin + e.R),
          format_real(e.dkw),
          e.censored() ? "1" : "0"};
}

const std::vector<std::string> estimate_header = {"n",  "normalization", "delta",     "low",     "high", "method",
                                                  "R",  "seed",          "rep_begin", "rep_end", "dkw",  "censored"};

std::vector<Normalization> normalizations(const Fields& f, std::vector<std::string> fallback) {
  const auto names = f.has("normalization") ? f.texts("normalization") : fallback;
  std::vector<Normalization> out;
  for (const auto& s : names) out.push_back(normalization_from_string(s));
  return out;
}

std::string curve_name(const std::string& prefix, Normalization n) {
  std::string s = prefix + "_" + to_string(n);
  for (char& c : s) {
    if (c == '-') c = '_';
  }
  return s;
}

PlotCurve rate_curve(const std::string& name, const std::vector<BEEstimate>& est) {
  PlotCurve c{name, {"n", "delta", "low", "high"}, {}, {}};
  for (const auto& e : est) {
    std::vector<double> row = {static_cast<double>(e.n), e.delta, e.low, e.high};
    (e.censored() || !(e.delta > 0.0) ? c.censored : c.rows).push_back(row);
  }
  return c;
}

void run_rates(const ExperimentConfig& cfg, const ProcessModel& model, Writer& w, RunManifest& man, bool counter) {
  const Fields f(cfg.params, "params");
  const auto grid = grid_field(f, "grid", counter ? 8 : 6, counter ? 18 : 14);
  const auto norms = normalizations(f, counter ? std::vector<std::string>{"sqrt-n-ss2", "sqrt-ESn2"}
                                               : std::vector<std::string>{"sqrt-n-ss2"});
  RateOptions opt;
  opt.R = f.count("R", 100000);
  opt.delta_conf = f.number("delta_conf", 0.01);
  opt.seed = cfg.seed;
  opt.method = counter ? RateMethod::gaussian_closed_form : rate_method_from_string(f.text("method", "auto"));
  if (f.has("ss2")) opt.ss2 = f.number("ss2");
  opt.par = Parallel{cfg.threads};
  const double level = f.number("level", 0.95);
  const std::string stem = counter ? "counterexample" : "rate";

  std::vector<std::vector<std::string>> rows;
  json fits = json::object();
  std::vector<PlotCurve> curves;
  std::uint64_t rep_end = 0;
  for (std::size_t i = 0; i < norms.size(); ++i) {
    opt.rep_offset = static_cast<std::uint64_t>(i) * grid.size() * opt.R;
    const auto est = run_rate_experiment(model, grid, norms[i], opt);
    for (const auto& e : est) {
      rows.push_back(estimate_row(e));
      if (e.method == DeltaMethod::empirical) rep_end = std::max(rep_end, e.rep_begin + e.R);
    }
    json entry;
    try {
      entry = fit_json(fit_rate(est, level));
    } catch (const PreconditionError& e) {
      entry = {{"fit", nullptr}, {"note", e.what()}};
      man.warnings.push_back(to_string(norms[i]) + ": " + e.what());
    }
    if (counter && model.as_linear().scheme.kind() == SchemeKind::power_law) {
      entry["expected_slope"] = 1.0 - model.as_linear().scheme.parameter();
    }
    fits[to_string(norms[i])] = entry;
    curves.push_back(rate_curve(curve_name(stem, norms[i]), est));
  }
  w.csv(stem + ".csv", estimate_header, rows, 0, rep_end);
  w.json_file(stem + "_fit.json", {{"model", model.describe()}, {"fits", fits}}, 0, rep_end);
  w.plots(curves, 0, rep_end);
}

void run_bedist(const ExperimentConfig& cfg, const ProcessModel& model, Writer& w) {
  const Fields f(cfg.params, "params");
  const auto ns = f.integers("n");
  const auto norms = normalizations(f, {"sqrt-n-ss2"});
  const std::size_t R = f.count("R", 100000);
  const RateMethod method = rate_method_from_string(f.text("method", "auto"));
  const bool gaussian_linear = model.is_linear() && model.law().kind == InnovationKind::standard_gaussian;
  const bool closed = method == RateMethod::gaussian_closed_form || (method == RateMethod::automatic && gaussian_linear);
  std::vector<std::vector<std::string>> rows;
  json records = json::array();
  std::uint64_t next = 0;
  for (auto norm : norms) {
    for (auto n : ns) {
      BEEstimate e;
      if (closed) {
        e = exact_delta_gaussian_linear(model, n, norm);
      } else {
        EmpiricalOptions eo;
        eo.R = R;
        eo.delta_conf = f.number("delta_conf", 0.01);
        eo.seed = cfg.seed;
        eo.rep_begin = next;
        eo.par = Parallel{cfg.threads};
        if (f.has("ss2")) eo.scales.ss2 = f.number("ss2");
        e = empirical_delta(model, n, norm, eo);
        next += R;
      }
      rows.push_back(estimate_row(e));
      records.push_back({{"n", e.n},
                         {"normalization", to_string(e.normalization)},
                         {"delta", e.delta},
                         {"low", e.low},
                         {"high", e.high},
                         {"method", to_string(e.method)},
                         {"R", e.R},
                         {"seed", e.seed},
                         {"rep_begin", e.rep_begin},
                         {"dkw", e.dkw},
                         {"censored", e.censored()}});
    }
  }
  w.csv("bedist.csv", estimate_header, rows, 0, next);
  w.json_file("bedist.json", {{"model", model.describe()}, {"estimates", records}}, 0, next);
}

std::string profile_mode(const Fields& f, const ProcessModel& model, double p) {
  std::string mode = f.text("mode", "auto");
  if (mode == "auto") {
    const bool closed = model.is_linear() && (p == 2.0 || model.law().kind == InnovationKind::standard_gaussian);
    mode = closed ? "closed-form" : "monte-carlo";
  }
  return mode;
}

DependenceProfile build_profile(const Fields& f, const ProcessModel& model, const std::vector<std::size_t>& lags,
                                double p, std::uint64_t seed, Parallel par) {
  if (profile_mode(f, model, p) == "closed-form") return closed_form_profile(model, lags, p);
  return mc_profile(model, lags, p, f.count("R", 10000), seed, par);
}

json profile_json(const DependenceProfile& prof) {
  json entries = json::array();
  for (const auto& e : prof.entries) {
    entries.push_back({{"l", e.l},
                       {"theta_prime", e.theta_prime},
                       {"theta_star", e.theta_star},
                       {"se_prime", e.se_prime},
                       {"se_star", e.se_star}});
  }
  return {{"p", prof.p}, {"mode", to_string(prof.mode)}, {"R", prof.R}, {"entries", entries}};
}

void write_profile(const DependenceProfile& prof, Writer& w, const std::string& stem) {
  std::vector<std::vector<std::string>> rows;
  PlotCurve c{stem, {"l", "theta_prime", "theta_star"}, {}, {}};
  for (const auto& e : prof.entries) {
    rows.push_back({std::to_string(e.l), format_real(e.theta_prime), format_real(e.se_prime),
                    format_real(e.theta_star), format_real(e.se_star)});
    const std::vector<double> row = {static_cast<double>(e.l), e.theta_prime, e.theta_star};
    (e.theta_prime > 0.0 && e.theta_star > 0.0 ? c.rows : c.censored).push_back(row);
  }
  w.csv(stem + ".csv", {"l", "theta_prime", "se_prime", "theta_star", "se_star"}, rows, 0, prof.R);
  w.plots({c}, 0, prof.R);
}

void run_depcoef(const ExperimentConfig& cfg, const ProcessModel& model, Writer& w) {
  const Fields f(cfg.params, "params");
  const double p = f.number("p", 2.0);
  const Parallel par{cfg.threads};
  if (model.is_gl()) {
    const std::size_t kmax = f.count("kmax", 20);
    const std::size_t R = f.count("R", 10000);
    std::vector<std::vector<std::string>> rows;
    json entries = json::array();
    PlotCurve c{"depcoef_gl", {"k", "theta", "low", "high"}, {}, {}};
    for (std::size_t k = 1; k <= kmax; ++k) {
      const auto s = theta_gl_surrogate(model, k, p, R, cfg.seed, par);
      rows.push_back({std::to_string(k), format_real(s.value), format_real(s.stderr_), std::to_string(s.pair)});
      entries.push_back({{"k", k}, {"theta", s.value}, {"stderr", s.stderr_}, {"pair", s.pair}});
      const std::vector<double> row = {static_cast<double>(k), s.value, s.value - 2.0 * s.stderr_,
                                       s.value + 2.0 * s.stderr_};
      (s.value > 0.0 ? c.rows : c.censored).push_back(row);
    }
    w.csv("depcoef_gl.csv", {"k", "theta", "stderr", "pair"}, rows, 0, R);
    w.json_file("depcoef_gl.json", {{"model", model.describe()}, {"p", p}, {"R", R}, {"entries", entries}}, 0, R);
    w.plots({c}, 0, R);
    return;
  }
  std::vector<std::size_t> lags;
  if (f.has("lags")) {
    for (auto l : f.integers("lags")) lags.push_back(static_cast<std::size_t>(l));
  } else {
    lags = dyadic_grid(f.count("L", 6));
  }
  const auto prof = build_profile(f, model, lags, p, cfg.seed, par);
  write_profile(prof, w, "depcoef");
  w.json_file("depcoef.json", {{"model", model.describe()}, {"profile", profile_json(prof)}}, 0, prof.R);
}

void run_assumptions(const ExperimentConfig& cfg, const ProcessModel& model, Writer& w) {
  const Fields f(cfg.params, "params");
  const AssumptionSpec spec(f.number("p"), f.number("a"), f.number("b"), f.number("tail_fraction", 0.5),
                            f.number("level", 0.95));
  const auto lags = dyadic_grid(f.count("L", 8));
  const auto prof = build_profile(f, model, lags, spec.p(), cfg.seed, Parallel{cfg.threads});
  const auto rep = check_assumptions(prof, spec);
  const auto tail = [](const TailFit& t) {
    return json{{"exponent", t.exponent},
                {"ci_low", t.ci_low},
                {"ci_high", t.ci_high},
                {"points", t.points},
                {"exact_zero", t.exact_zero}};
  };
  write_profile(prof, w, "assumptions_profile");
  w.json_file("assumptions.json",
              {{"model", model.describe()},
               {"p", spec.p()},
               {"a", spec.a()},
               {"b", spec.b()},
               {"B_p", boundary_B(spec.p())},
               {"partial_sum_b", rep.partial_sum_b},
               {"partial_sum_a", rep.partial_sum_a},
               {"partial_sum_unify", rep.partial_sum_unify},
               {"prime_fit", tail(rep.prime_fit)},
               {"star_fit", tail(rep.star_fit)},
               {"verdict_b", to_string(rep.verdict_b)},
               {"verdict_a", to_string(rep.verdict_a)},
               {"verdict_unify", to_string(rep.verdict_unify)},
               {"b_alone_sufficient", rep.b_alone_sufficient},
               {"profile", profile_json(prof)}},
              0, prof.R);
}

void run_variance(const ExperimentConfig& cfg, const ProcessModel& model, Writer& w) {
  const Fields f(cfg.params, "params");
  const auto n = f.integer("n", 1024);
  const auto m = f.count("m", 0);
  const auto K = f.count("K", 64);
  const auto R = f.count("R", 100000);
  const Parallel par{cfg.threads};
  AutocovMethod method = AutocovMethod::monte_carlo;
  if (model.is_linear()) method = AutocovMethod::exact_linear;
  if (model.is_doubling() && K <= 20) method = AutocovMethod::exact_doubling;
  if (model.is_gl() && model.as_gl().d == 2) method = AutocovMethod::exact_gl2;
  const auto table = autocovariance(model, K, method, R, cfg.seed, par);
  const std::uint64_t rep_end = method == AutocovMethod::monte_carlo ? R : 0;
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < table.gamma.size(); ++k) {
    rows.push_back({std::to_string(k), format_real(table.gamma[k]), format_real(table.stderr_[k])});
  }
  w.csv("autocovariance.csv", {"k", "gamma", "stderr"}, rows, 0, rep_end);
  const auto rep = variance_report(model, n, m, K, R, cfg.seed, par);
  json doc = {{"model", model.describe()},
              {"method", to_string(method)},
              {"ss2", rep.ss2},
              {"n", rep.n},
              {"s_n2", rep.s_n2},
              {"note", rep.note}};
  if (m > 0) {
    doc["m"] = rep.m;
    doc["sigma_hat_m2"] = rep.sigma_hat_m2;
    doc["ss_m2"] = rep.ss_m2;
  }
  w.json_file("variance.json", doc, 0, rep_end);
}

void run_blocks(const ExperimentConfig& cfg, const ProcessModel& model, Writer& w) {
  const Fields f(cfg.params, "params");
  const auto n = f.integer("n");
  const auto ms = f.integers("m");
  BlockOptions opt;
  opt.mode = f.text("mode", model.is_linear() ? "exact-linear" : "nested-mc") == "exact-linear"
                 ? BlockMode::exact_linear
                 : BlockMode::nested_mc;
  opt.K = f.count("K", 10000);
  opt.projection_K = f.count("projection_K", 256);
  opt.seed = cfg.seed;
  const std::size_t reps = f.count("replications", 1);
  const std::size_t R = f.count("R", 10000);
  const double factor = f.number("factor", 0.125);
  const Parallel par{cfg.threads};

  json records = json::array();
  json summary = json::array();
  std::vector<std::vector<std::string>> rows;
  PlotCurve gap{"blocks_gap", {"m", "gap"}, {}, {}};
  for (auto m : ms) {
    const auto layout = make_layout(n, m);
    const auto sh = projected_sigma_hat(model, m, opt, 100000, par);
    std::vector<BlockDiagnostics> diags(reps);
    parallel_for(reps, par, [&](std::size_t b, std::size_t e) {
      for (std::size_t r = b; r < e; ++r) diags[r] = conditional_variances(model, layout, r, opt);
    });
    double first = 0.0;
    for (const auto& d : diags) {
      first += d.sigma2_j.front() / static_cast<double>(reps);
      records.push_back({{"n", layout.n},
                         {"m", layout.m},
                         {"N", layout.N},
                         {"m_prime", layout.m_prime},
                         {"replication", d.replication},
                         {"mode", to_string(d.mode)},
                         {"sigma2_j", d.sigma2_j},
                         {"sigma2_cond", d.sigma2_cond},
                         {"sigma_bar2", d.sigma_bar2},
                         {"varsigma_bar2", d.varsigma_bar2},
                         {"ss_nm2", d.ss_nm2},
                         {"residual", d.residual}});
      for (std::size_t j = 0; j < d.sigma2_j.size(); ++j) {
        rows.push_back({std::to_string(layout.n), std::to_string(layout.m), std::to_string(d.replication),
                        std::to_string(j + 1), format_real(d.sigma2_j[j])});
      }
    }
    json s = {{"n", layout.n},
              {"m", layout.m},
              {"N", layout.N},
              {"m_prime", layout.m_prime},
              {"sigma_hat_m2", sh.value},
              {"ss_m2", sh.ss_m2},
              {"mean_sigma2_1", first},
              {"gap", std::fabs(first - sh.value)}};
    if (R > 0) {
      s["degeneracy_R"] = R;
      s["degeneracy_factor"] = factor;
      s["degeneracy_frequency"] = degeneracy_probability(model, layout, R, opt, factor, sh.ss_m2, par);
    }
    summary.push_back(s);
    const std::vector<double> row = {static_cast<double>(m), std::fabs(first - sh.value)};
    (row[1] > 0.0 ? gap.rows : gap.censored).push_back(row);
  }
  const std::uint64_t rep_end = std::max<std::uint64_t>(reps, R);
  w.csv("blocks.csv", {"n", "m", "replication", "j", "sigma2_j"}, rows, 0, reps);
  w.json_file("blocks.json", {{"model", model.describe()}, {"records", records}, {"summary", summary}}, 0, rep_end);
  if (ms.size() > 1) w.plots({gap}, 0, reps);
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
  RunManifest man;
  man.digest = config_digest(cfg);
  man.version = artifact_version;
  man.started = utc_now();
  man.seed = cfg.seed;
  man.task = to_string(cfg.task);
  fs::create_directories(out_dir);
  const ProcessModel model = build_model(cfg.model, cfg.seed);
  Writer w(out_dir, man);
  switch (cfg.task) {
    case Task::depcoef: run_depcoef(cfg, model, w); break;
    case Task::variance: run_variance(cfg, model, w); break;
    case Task::bedist: run_bedist(cfg, model, w); break;
    case Task::rate: run_rates(cfg, model, w, man, false); break;
    case Task::counterexample: run_rates(cfg, model, w, man, true); break;
    case Task::blocks: run_blocks(cfg, model, w); break;
    case Task::assumptions: run_assumptions(cfg, model, w); break;
  }
  man.finished = utc_now();
  std::ofstream out(out_dir / "manifest.json", std::ios::binary);
  out << to_json(man).dump(2) << '\n';
  if (!out) throw Error("cannot write manifest.json");
  return man;
}

}  // namespace weakdep
