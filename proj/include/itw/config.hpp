#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "itw/scenario.hpp"
#include "itw/types.hpp"

namespace itw {

enum class Command { Verify, Converge, Convert, ListScenarios };
enum class OutputFormat { Csv, Json };

const char* to_string(Command c);
const char* to_string(OutputFormat f);

/// One batch run, parsed from `key = value` lines ('#' starts a comment).
/// Keys: command, scenario, params.*, T, N, levels, M, seed, mode, z.*,
/// format. Output path and thread count come from the command line, not the
/// config text.
struct RunConfig {
    Command command = Command::Verify;
    std::string scenario;
    ParamMap params;
    std::optional<double> horizon;           // T
    std::optional<std::size_t> steps;        // N
    std::vector<std::size_t> levels;         // comma separated in the file
    std::size_t paths = 100;                 // M
    std::uint64_t seed = 0;
    Representation mode = Representation::NonCentered;
    std::map<std::size_t, double> initial;   // z.i
    OutputFormat format = OutputFormat::Csv;

    std::string out_path;                    // empty: stdout
    unsigned threads = 1;

    /// True when the config text itself carried a command key (the CLI
    /// subcommand must then agree with it).
    bool command_explicit = false;

    bool operator==(const RunConfig& o) const;
};

/// Parses and validates config text. Violations throw ConfigError carrying
/// the 1-based line number: unknown keys, malformed values, unknown
/// scenarios, bad parameter keys, N <= 0, levels not nested by powers of
/// two. Defaults: M = 100, mode = non-centered, format = csv, seed = 0.
RunConfig parse_config(const std::string& text);

/// Inverse of parse_config over the config-grammar fields:
/// parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const RunConfig& config);

/// Builds the scenario a config names, applying T and z.* overrides.
ScenarioSpec build_scenario(const RunConfig& config);

}  // namespace itw
