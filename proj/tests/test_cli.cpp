#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "weakdep/cli.hpp"
#include "weakdep/errors.hpp"

using namespace weakdep;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("weakdep-test-" + std::to_string(::getpid()) + "-" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

json variance_doc() {
  return json::parse(R"({"name": "v", "seed": 3, "task": "variance",
    "model": {"variant": "linear", "scheme": {"kind": "geometric", "rho": 0.5}, "innovation": "rademacher"},
    "params": {"n": 256, "m": 8, "K": 16}})");
}

json bedist_doc() {
  return json::parse(R"({"name": "b", "seed": 5, "task": "bedist",
    "model": {"variant": "linear", "scheme": {"kind": "power-law", "a": 1.5}, "innovation": "rademacher"},
    "params": {"n": [16, 64], "R": 2000, "normalization": ["sqrt-n-ss2", "sqrt-ESn2"]}})");
}

template <class F>
std::string config_error_field(F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(WEAKDEP_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("csv quoting and number format") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  for (double x : {0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0}) CHECK(std::strtod(format_real(x).c_str(), nullptr) == x);
}

TEST_CASE("config structure errors name the field") {
  auto doc = variance_doc();
  doc.erase("task");
  CHECK(config_error_field([&] { parse_config(doc); }) == "task");
  doc = variance_doc();
  doc["params"]["bogus"] = 1;
  CHECK(config_error_field([&] { parse_config(doc); }) == "params.bogus");
  doc = variance_doc();
  doc["params"]["n"] = "many";
  CHECK(config_error_field([&] { parse_config(doc); }) == "params.n");
  doc = variance_doc();
  doc["model"]["scheme"]["rho"] = "x";
  CHECK(config_error_field([&] { parse_config(doc); }) == "model.scheme.rho");
  doc = variance_doc();
  doc["task"] = "dance";
  CHECK(config_error_field([&] { parse_config(doc); }) == "task");
}

TEST_CASE("module preconditions surface before any work") {
  auto doc = variance_doc();
  doc["model"]["scheme"] = {{"kind", "power-law"}, {"a", 0.3}};
  CHECK_THROWS_AS(parse_config(doc), PreconditionError);
  doc = json::parse(R"({"task": "assumptions", "model": {"variant": "linear", "scheme": {"kind": "geometric", "rho": 0.5}},
    "params": {"p": 3, "a": 1, "b": 0.6}})");
  CHECK_THROWS_AS(parse_config(doc), PreconditionError);
  doc = json::parse(R"({"task": "blocks", "model": {"variant": "linear", "scheme": {"kind": "geometric", "rho": 0.5}},
    "params": {"n": 64, "m": 4}})");
  CHECK_THROWS_AS(parse_config(doc), PreconditionError);
}

TEST_CASE("digest ignores output location and threads") {
  auto a = parse_config(variance_doc());
  auto b = a;
  b.output = "/elsewhere";
  b.threads = 4;
  CHECK(config_digest(a) == config_digest(b));
  CHECK(config_digest(a).size() == 16);
  b.seed = 4;
  CHECK(config_digest(a) != config_digest(b));
  CHECK(config_digest(parse_config(to_json(a))) == config_digest(a));
}

TEST_CASE("every preset validates") {
  CHECK(presets().size() == 5);
  for (const auto& p : presets()) {
    const auto cfg = parse_config(p.config);
    CHECK(cfg.name == p.name);
  }
  CHECK_THROWS_AS(find_preset("nope"), ConfigError);
}

TEST_CASE("output directory precedence") {
  auto cfg = parse_config(variance_doc());
  ::unsetenv(output_env_var);
  CHECK(resolve_output_dir(cfg, std::nullopt) == fs::path("weakdep-out"));
  ::setenv(output_env_var, "/tmp/from-env", 1);
  CHECK(resolve_output_dir(cfg, std::nullopt) == fs::path("/tmp/from-env"));
  cfg.output = "/tmp/from-config";
  CHECK(resolve_output_dir(cfg, std::nullopt) == fs::path("/tmp/from-config"));
  CHECK(resolve_output_dir(cfg, std::string("/tmp/from-flag")) == fs::path("/tmp/from-flag"));
  ::unsetenv(output_env_var);
}

TEST_CASE("error records and exit codes") {
  CHECK(exit_code_for(ConfigError("x", "bad")) == 2);
  CHECK(exit_code_for(PreconditionError("bad")) == 3);
  CHECK(exit_code_for(DegenerateVarianceError("bad")) == 4);
  CHECK(exit_code_for(std::runtime_error("bad")) == 1);
  const auto rec = error_record(ConfigError("params.n", "bad"));
  CHECK(rec["error"]["kind"] == "parse");
  CHECK(rec["error"]["field"] == "params.n");
  CHECK(rec["error"]["exit_code"] == 2);
}

TEST_CASE("plot data files") {
  const auto dir = scratch("plots");
  fs::create_directories(dir);
  std::vector<std::string> warnings;
  const auto files = emit_plotdata({{"curve", {"n", "delta"}, {{64, 0.1}, {128, 0.07}}, {{256, 0.0}}}}, dir, &warnings);
  CHECK(files == std::vector<std::string>{"curve.dat", "curve.censored.dat"});
  const auto text = slurp(dir / "curve.dat");
  CHECK(text.rfind("#", 0) == 0);
  CHECK(text.find("128") != std::string::npos);
  CHECK(emit_plotdata({}, dir).empty());
  fs::remove_all(dir);
}

TEST_CASE("runs are reproducible across thread counts") {
  const auto d1 = scratch("run1"), d2 = scratch("run2");
  auto cfg = parse_config(bedist_doc());
  const auto m1 = run_experiment(cfg, d1);
  cfg.threads = 3;
  const auto m2 = run_experiment(cfg, d2);
  REQUIRE(m1.outputs.size() == m2.outputs.size());
  CHECK(m1.digest == m2.digest);
  for (const auto& o : m1.outputs) {
    CHECK(fs::exists(d1 / o.file));
    if (o.kind == "csv") CHECK(slurp(d1 / o.file) == slurp(d2 / o.file));
  }
  const auto manifest = json::parse(slurp(d1 / "manifest.json"));
  CHECK(manifest["config_digest"] == m1.digest);
  CHECK(manifest["seed"] == 5);
  const auto csv = slurp(d1 / "bedist.csv");
  CHECK(csv.find("\r\n") != std::string::npos);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("command line exit codes") {
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << "{\"task\": ";
  std::ofstream(dir / "pre.json") << R"({"task": "variance", "model": {"variant": "linear",
    "scheme": {"kind": "power-law", "a": 0.3}}})";
  std::ofstream(dir / "degenerate.json") << R"({"task": "bedist", "model": {"variant": "linear",
    "scheme": {"kind": "difference-power", "beta": 0.25}}, "params": {"n": [64], "method": "gaussian-closed-form"}})";
  std::ofstream(dir / "ok.json") << variance_doc().dump();
  CHECK(run_cli("--version") == 0);
  CHECK(run_cli("presets list") == 0);
  CHECK(run_cli("presets show gl2-walk") == 0);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("validate " + (dir / "bad.json").string()) == 2);
  CHECK(run_cli("validate " + (dir / "missing.json").string()) == 2);
  CHECK(run_cli("validate " + (dir / "pre.json").string()) == 3);
  CHECK(run_cli("run " + (dir / "degenerate.json").string() + " --out " + (dir / "o1").string()) == 4);
  CHECK(run_cli("run " + (dir / "ok.json").string() + " --out " + (dir / "o2").string()) == 0);
  CHECK(fs::exists(dir / "o2" / "manifest.json"));
  fs::remove_all(dir);
}
