#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "weakdep/cli.hpp"

namespace {

int report(const std::exception& e) {
  std::cerr << weakdep::error_record(e).dump() << '\n';
  return weakdep::exit_code_for(e);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak-dependence Berry-Esseen laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", weakdep::artifact_version);

  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  std::string run_path;
  std::optional<unsigned> threads;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  run->add_option("config", run_path, "Config file")->required();
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory (default: config, then $WEAKDEP_OUT, then ./weakdep-out)");
  run->add_option("--seed", seed, "Master seed override");

  auto* presets = app.add_subcommand("presets", "Named configs for the worked examples");
  presets->require_subcommand(1);
  auto* list = presets->add_subcommand("list", "List presets");
  auto* show = presets->add_subcommand("show", "Print a preset config");
  std::string preset_name;
  show->add_option("name", preset_name)->required();

  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  std::string validate_path;
  validate->add_option("config", validate_path, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      auto cfg = weakdep::load_config(run_path);
      if (seed) cfg.seed = *seed;
      if (threads) cfg.threads = *threads;
      const auto dir = weakdep::resolve_output_dir(cfg, out_dir);
      const auto man = weakdep::run_experiment(cfg, dir);
      for (const auto& o : man.outputs) std::cout << (dir / o.file).string() << '\n';
      std::cout << (dir / "manifest.json").string() << '\n';
      for (const auto& w : man.warnings) std::cerr << "warning: " << w << '\n';
    } else if (*list) {
      for (const auto& p : weakdep::presets()) std::cout << p.name << "\t" << p.description << '\n';
    } else if (*show) {
      std::cout << weakdep::find_preset(preset_name).config.dump(2) << '\n';
    } else if (*validate) {
      const auto cfg = weakdep::load_config(validate_path);
      std::cout << "ok " << weakdep::to_string(cfg.task) << " " << weakdep::config_digest(cfg) << '\n';
    }
  } catch (const std::exception& e) {
    return report(e);
  }
  return 0;
}
