#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spme/grid.hpp"
#include "spme/noise.hpp"
#include "spme/sde_solver.hpp"

namespace spme {

// Exit statuses of the experiment runner.
enum ExitStatus : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitConfig = 2,
    kExitNumerical = 3,
    kExitAssertion = 4,
};

/// Fully resolved and validated experiment configuration.
struct ExperimentConfig {
    nlohmann::json resolved;  // defaults merged with the file and overrides
    Grid grid;
    NoiseModel noise;
    SolverConfig solver;
    std::string name;
    nlohmann::json parameters;
    std::uint64_t seed;
    std::string output_dir;
};

nlohmann::json default_config();

/// Applies "dotted.path=value". The value is parsed as JSON when possible and
/// kept as a string otherwise.
void apply_override(nlohmann::json& config, std::string_view assignment);

/// Merges `raw` over the defaults and validates every module invariant.
/// Throws ConfigError naming the violated invariant.
ExperimentConfig resolve_config(const nlohmann::json& raw);

/// Builds an initial field from a number (constant field) or an object
/// {"type": "constant"|"random"|"fixed_point"|"values", ...}.
Field initial_field(const nlohmann::json& spec, const ExperimentConfig& cfg);

const std::vector<std::string>& subcommands();

struct RunOptions {
    std::string subcommand;
    std::optional<std::string> config_path;
    std::vector<std::string> overrides;
    std::size_t workers = 1;
    std::optional<std::string> output_dir;
};

/// Runs one subcommand and writes manifest.json, report.json and any CSV
/// artifacts into the output directory. Returns an ExitStatus.
int run(const RunOptions& options, std::ostream& log);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view data);

}  // namespace spme
