// Batch front-end: verify | converge | convert | list-scenarios over a
// key = value config file.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "itw/runner.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    std::string format;
    std::uint64_t seed = 0;
    bool seed_given = false;
    unsigned threads = 1;
};

void attach_common(CLI::App* sub, CommonArgs& args, bool config_required) {
    auto* cfg = sub->add_option("--config", args.config_path, "config file (key = value lines)");
    if (config_required) cfg->required();
    cfg->check(CLI::ExistingFile);
    sub->add_option("--out", args.out_path, "write the table to this file instead of stdout");
    sub->add_option("--format", args.format, "csv or json (overrides the config)")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", args.seed, "master seed (overrides the config)")
        ->each([&args](const std::string&) { args.seed_given = true; });
    sub->add_option("--threads", args.threads, "worker threads for path loops")
        ->check(CLI::PositiveNumber);
}

int execute(itw::Command command, const CommonArgs& args) {
    itw::RunConfig config;
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        config = itw::parse_config(buffer.str());
    }
    if (config.command_explicit && config.command != command) {
        std::cerr << "error: config file says command=" << itw::to_string(config.command)
                  << " but the subcommand is " << itw::to_string(command) << "\n";
        return 2;
    }
    config.command = command;
    if (args.seed_given) config.seed = args.seed;
    if (!args.format.empty())
        config.format = args.format == "json" ? itw::OutputFormat::Json : itw::OutputFormat::Csv;
    config.out_path = args.out_path;
    config.threads = args.threads;

    const itw::RunResult result = itw::run(config);
    if (!result.warning.empty()) std::cerr << "warning: " << result.warning << "\n";
    if (result.out_path.empty()) std::cout << result.output;
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"jump-diffusion co-simulation and pathwise chain-rule verification"};
    app.require_subcommand(1);

    CommonArgs verify_args, converge_args, convert_args, list_args;
    auto* verify = app.add_subcommand("verify", "per-seed residual reports for one scenario");
    attach_common(verify, verify_args, true);
    auto* converge = app.add_subcommand("converge", "residual statistics across nested step counts");
    attach_common(converge, converge_args, true);
    auto* convert = app.add_subcommand("convert", "audit a representation conversion on a time grid");
    attach_common(convert, convert_args, true);
    auto* list = app.add_subcommand("list-scenarios", "print the scenario catalog");
    attach_common(list, list_args, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) return execute(itw::Command::Verify, verify_args);
        if (converge->parsed()) return execute(itw::Command::Converge, converge_args);
        if (convert->parsed()) return execute(itw::Command::Convert, convert_args);
        return execute(itw::Command::ListScenarios, list_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
