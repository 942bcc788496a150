#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ubmlab/report.hpp"

namespace ubmlab {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// One experiment per JSON file:
///   {"kind": "...", "params": {...}, "n_samples": N, "seed": S, "output": "dir"}
struct ExperimentConfig {
    std::string kind;
    nlohmann::json params = nlohmann::json::object();
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    std::filesystem::path output = ".";
};

const std::vector<std::string>& experiment_kinds();

/// Parses and validates against the kind's parameter schema; missing
/// parameters are filled with their defaults.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError on an unknown kind, unknown or mistyped parameters, or
/// a sample count the kind cannot use.
void validate_config(ExperimentConfig& config);

Report run_experiment(ExperimentConfig config);

/// Writes <output>/<kind>.json and <output>/<kind>.csv; returns the JSON path.
std::filesystem::path emit_report(const Report& report, const std::filesystem::path& output_dir);

}  // namespace ubmlab
