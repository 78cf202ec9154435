#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "infchain/model.hpp"
#include "infchain/simulate.hpp"

namespace infchain {

using json = nlohmann::json;

/// Command-line / caller overrides applied on top of the config file.
struct RunOptions {
  int threads = 0;  // 0 -> hardware concurrency
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
};

struct TaskOutcome {
  std::string task;
  std::string csv_file;  // path of the table written for this task
  bool pass = false;
  json details;  // task-specific values and verdicts, mirrored in the manifest
};

struct RunResult {
  int exit_code = 0;  // 0 iff every verdict passed
  std::vector<TaskOutcome> tasks;
  std::string manifest_file;
  json manifest;
};

/// Strict validation: every object is checked against its allowed key set
/// (unknown keys are errors), samplers and models must come from the
/// catalogue, and the plan must satisfy the resource limits. Returns the
/// resolved config with defaults materialized. Throws ConfigError.
json validate_config(const json& config);

/// Builds the model described by a config's "model" object (construction
/// enforces the contraction conditions).
ChainModel build_model(const json& model_spec, const OrliczFunction& phi);

OrliczFunction build_phi(const json& phi_spec);
Sampler build_sampler(const json& sampler_spec);
CoefficientSequence build_coefficients(const json& spec);

/// Executes every task in the config in order, writing one CSV per task plus
/// manifest.json into the output directory. Exceptions map to exit codes in
/// the CLI: config 2, numeric 3, capacity 4; verdict failures yield exit 1.
RunResult run_experiment(const json& config, const RunOptions& options = {});
RunResult run_experiment_file(const std::string& config_path, const RunOptions& options = {});

/// Parse-and-validate entry point for the `validate` subcommand; returns the
/// resolved config and any plan warnings.
std::pair<json, std::vector<std::string>> validate_experiment_file(const std::string& config_path);

extern const char* const kVersion;

}  // namespace infchain
