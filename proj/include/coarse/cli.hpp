#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace coarse {

inline constexpr const char* kToolVersion = "1.0.0";

// One run of one subcommand. Identical configs give byte-identical outputs.
struct ExperimentConfig {
  std::string name;       // label in a batch; also the default output stem
  std::string command;    // one of subcommands()
  nlohmann::json input;   // graph or pseudogroup: shorthand string, file path, or JSON object
  nlohmann::json params = nlohmann::json::object();
  std::size_t horizon = 16;
  std::size_t budget = 2'000'000;  // vertex budget for lazily explored spaces
  std::string format = "json";     // json | csv
  std::uint64_t seed = 0;
  std::string output;              // file name inside the run directory
  std::string base_dir;            // relative paths in input and params resolve here
};

const std::vector<std::string>& subcommands();

// {"name", "command", "input", "params", "horizon", "budget", "format", "seed", "output"}.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& base_dir = "");
nlohmann::json to_json(const ExperimentConfig& c);

struct RunResult {
  int status = 0;  // 0 success, 1 error or failed verification
  nlohmann::json report;
  std::vector<std::vector<std::string>> table;  // header row first
};

// Never throws: library errors come back as status 1 with {"error", "message", "detail"}.
RunResult run(const ExperimentConfig& config);
std::string render(const RunResult& result, const std::string& format);
std::string output_name(const ExperimentConfig& config, std::size_t index);

struct BatchResult {
  int status = 0;  // max over experiments
  nlohmann::json manifest;
};

// Runs the experiments (up to `jobs` at a time), writes each output into dir, then manifest.json.
BatchResult run_batch(const std::vector<ExperimentConfig>& configs, const std::string& dir,
                      std::size_t jobs = 1);

}  // namespace coarse
