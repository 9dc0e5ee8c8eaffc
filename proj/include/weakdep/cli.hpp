#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "weakdep/errors.hpp"
#include "weakdep/processes.hpp"

namespace weakdep {

inline constexpr const char* artifact_version = "0.1.0";
inline constexpr const char* output_env_var = "WEAKDEP_OUT";

// Structural problem in a config document: bad JSON, missing field, wrong type.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class Task { depcoef, variance, bedist, rate, blocks, counterexample, assumptions };
std::string to_string(Task t);
Task task_from_string(const std::string& name);

struct ExperimentConfig {
  std::string name;
  std::uint64_t seed = 0;
  Task task = Task::rate;
  nlohmann::json model;   // variant + parameters
  nlohmann::json params;  // task parameters
  std::optional<std::string> output;
  unsigned threads = 1;
};

// Parses and validates; ConfigError for structure, PreconditionError for module preconditions.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

ProcessModel build_model(const nlohmann::json& spec, std::uint64_t seed);

// FNV-1a 64 of the canonical config without output location and thread count, as 16 hex digits.
std::string config_digest(const ExperimentConfig& cfg);

struct Preset {
  std::string name;
  std::string description;
  nlohmann::json config;
};
const std::vector<Preset>& presets();
const Preset& find_preset(const std::string& name);

struct OutputRecord {
  std::string file;
  std::string kind;  // csv, json, plot, sidecar
  std::uint64_t rep_begin = 0;
  std::uint64_t rep_end = 0;  // exclusive; equal to rep_begin when no replications are used
};

struct RunManifest {
  std::string digest;
  std::string version;
  std::string started;
  std::string finished;
  std::uint64_t seed = 0;
  std::string task;
  std::vector<OutputRecord> outputs;
  std::vector<std::string> warnings;
};
nlohmann::json to_json(const RunManifest& m);

// Runs the task, writes outputs and manifest.json into `out_dir`.
RunManifest run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// --out, then the config, then the environment variable, then ./weakdep-out.
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg, const std::optional<std::string>& flag);

// Exit status for an exception escaping a command: 2 parse, 3 precondition, 4 degenerate, 1 other.
int exit_code_for(const std::exception& e);
nlohmann::json error_record(const std::exception& e);

// RFC 4180 field quoting.
std::string csv_field(const std::string& s);
std::string format_real(double x);

struct PlotCurve {
  std::string name;
  std::vector<std::string> columns;  // header names
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<double>> censored;  // written to <name>.censored.dat when non-empty
};
// One whitespace-delimited file per curve; returns the files written (none for an empty set).
std::vector<std::string> emit_plotdata(const std::vector<PlotCurve>& curves, const std::filesystem::path& dir,
                                       std::vector<std::string>* warnings = nullptr);

}  // namespace weakdep
