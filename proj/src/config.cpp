#include "itw/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace itw {

const char* to_string(Command c) {
    switch (c) {
        case Command::Verify: return "verify";
        case Command::Converge: return "converge";
        case Command::Convert: return "convert";
        case Command::ListScenarios: return "list-scenarios";
    }
    return "verify";
}

const char* to_string(OutputFormat f) {
    return f == OutputFormat::Csv ? "csv" : "json";
}

bool RunConfig::operator==(const RunConfig& o) const {
    return command == o.command && scenario == o.scenario && params == o.params &&
           horizon == o.horizon && steps == o.steps && levels == o.levels && paths == o.paths &&
           seed == o.seed && mode == o.mode && initial == o.initial && format == o.format &&
           out_path == o.out_path && threads == o.threads;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& value, int line, const std::string& key) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size() || !std::isfinite(v))
            throw ConfigError(line, "malformed value for '" + key + "': " + value);
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        throw ConfigError(line, "malformed value for '" + key + "': " + value);
    }
}

std::uint64_t parse_unsigned(const std::string& value, int line, const std::string& key) {
    const std::string v = trim(value);
    if (v.empty() || v[0] == '-')
        throw ConfigError(line, "'" + key + "' must be a non-negative integer, got " + value);
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError(line, "malformed value for '" + key + "': " + value);
    return out;
}

std::size_t parse_positive(const std::string& value, int line, const std::string& key) {
    const std::uint64_t v = parse_unsigned(value, line, key);
    if (v == 0) throw ConfigError(line, "'" + key + "' must be positive");
    return static_cast<std::size_t>(v);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig config;
    int scenario_line = 0;
    bool saw_scenario = false, saw_steps = false, saw_levels = false;
    std::map<std::string, int> param_lines;

    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string stripped = trim(raw);
        if (stripped.empty()) continue;

        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(line, "expected 'key = value', got '" + stripped + "'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(line, "expected 'key = value', got '" + stripped + "'");

        if (key == "command") {
            if (value == "verify") config.command = Command::Verify;
            else if (value == "converge") config.command = Command::Converge;
            else if (value == "convert") config.command = Command::Convert;
            else if (value == "list-scenarios") config.command = Command::ListScenarios;
            else throw ConfigError(line, "unknown command '" + value + "'");
            config.command_explicit = true;
        } else if (key == "scenario") {
            config.scenario = value;
            scenario_line = line;
            saw_scenario = true;
        } else if (key.rfind("params.", 0) == 0) {
            const std::string pkey = key.substr(7);
            if (pkey.empty()) throw ConfigError(line, "empty parameter name");
            config.params[pkey] = parse_double(value, line, key);
            param_lines[pkey] = line;
        } else if (key == "T") {
            const double T = parse_double(value, line, key);
            if (!(T > 0.0)) throw ConfigError(line, "'T' must be positive");
            config.horizon = T;
        } else if (key == "N") {
            config.steps = parse_positive(value, line, key);
            saw_steps = true;
        } else if (key == "levels") {
            config.levels.clear();
            std::istringstream ls(value);
            std::string tok;
            while (std::getline(ls, tok, ','))
                config.levels.push_back(parse_positive(trim(tok), line, key));
            if (config.levels.empty()) throw ConfigError(line, "'levels' must not be empty");
            for (std::size_t r = 1; r < config.levels.size(); ++r) {
                const std::size_t lo = config.levels[r - 1], hi = config.levels[r];
                const bool nested = hi > lo && hi % lo == 0 &&
                                    ((hi / lo) & (hi / lo - 1)) == 0;
                if (!nested)
                    throw ConfigError(line,
                                      "'levels' must increase by power-of-two factors");
            }
            saw_levels = true;
        } else if (key == "M") {
            config.paths = parse_positive(value, line, key);
        } else if (key == "seed") {
            config.seed = parse_unsigned(value, line, key);
        } else if (key == "mode") {
            if (value == "centered") config.mode = Representation::Centered;
            else if (value == "non-centered") config.mode = Representation::NonCentered;
            else throw ConfigError(line, "mode must be 'centered' or 'non-centered'");
        } else if (key.rfind("z.", 0) == 0) {
            const std::string idx = key.substr(2);
            const std::size_t i =
                static_cast<std::size_t>(parse_unsigned(idx, line, key));
            config.initial[i] = parse_double(value, line, key);
        } else if (key == "format") {
            if (value == "csv") config.format = OutputFormat::Csv;
            else if (value == "json") config.format = OutputFormat::Json;
            else throw ConfigError(line, "format must be 'csv' or 'json'");
        } else {
            throw ConfigError(line, "unknown key '" + key + "'");
        }
    }

    const bool needs_scenario = config.command != Command::ListScenarios;
    if (needs_scenario) {
        if (!saw_scenario) throw ConfigError(0, "missing required key 'scenario'");
        CatalogInfo info;
        try {
            info = catalog_info(config.scenario);
        } catch (const std::invalid_argument&) {
            throw ConfigError(scenario_line, "unknown scenario '" + config.scenario + "'");
        }
        for (const auto& [pkey, pline] : param_lines) {
            const bool known =
                std::find(info.required.begin(), info.required.end(), pkey) !=
                    info.required.end() ||
                info.defaults.count(pkey);
            if (!known)
                throw ConfigError(pline, "scenario '" + config.scenario +
                                             "': unknown parameter '" + pkey + "'");
        }
        for (const auto& rkey : info.required) {
            if (!config.params.count(rkey))
                throw ConfigError(scenario_line, "scenario '" + config.scenario +
                                                     "': missing required parameter '" + rkey +
                                                     "'");
        }
        for (const auto& [i, v] : config.initial) {
            (void)v;
            if (i >= info.n)
                throw ConfigError(0, "z." + std::to_string(i) + " is out of range for scenario '" +
                                         config.scenario + "'");
        }
    }
    if (config.command == Command::Verify && !saw_steps)
        throw ConfigError(0, "missing required key 'N'");
    if (config.command == Command::Converge && !saw_levels)
        throw ConfigError(0, "missing required key 'levels'");

    return config;
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string serialize_config(const RunConfig& config) {
    std::ostringstream os;
    os << "command = " << to_string(config.command) << "\n";
    if (!config.scenario.empty()) os << "scenario = " << config.scenario << "\n";
    for (const auto& [key, value] : config.params)
        os << "params." << key << " = " << fmt17(value) << "\n";
    if (config.horizon) os << "T = " << fmt17(*config.horizon) << "\n";
    if (config.steps) os << "N = " << *config.steps << "\n";
    if (!config.levels.empty()) {
        os << "levels = ";
        for (std::size_t r = 0; r < config.levels.size(); ++r)
            os << (r ? "," : "") << config.levels[r];
        os << "\n";
    }
    os << "M = " << config.paths << "\n";
    os << "seed = " << config.seed << "\n";
    os << "mode = " << to_string(config.mode) << "\n";
    for (const auto& [i, v] : config.initial) os << "z." << i << " = " << fmt17(v) << "\n";
    os << "format = " << to_string(config.format) << "\n";
    return os.str();
}

ScenarioSpec build_scenario(const RunConfig& config) {
    ScenarioSpec spec = catalog(config.scenario, config.params);
    if (config.horizon) spec.horizon = *config.horizon;
    for (const auto& [i, v] : config.initial) {
        if (i >= spec.n)
            throw std::invalid_argument("z." + std::to_string(i) + " out of range");
        spec.initial_state[i] = v;
    }
    return spec;
}

}  // namespace itw
