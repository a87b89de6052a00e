#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "itw/runner.hpp"
#include "itw/wentzell.hpp"

using namespace itw;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::istringstream is(line);
    std::string cell;
    while (std::getline(is, cell, ',')) cells.push_back(cell);
    return cells;
}

const char* kVerifyConfig =
    "command=verify\n"
    "scenario=jump-only\n"
    "params.lambda=2\n"
    "params.c=1\n"
    "N=1024\n"
    "seed=7\n";

}  // namespace

TEST_CASE("a plain verify config parses with its defaults") {
    const RunConfig config = parse_config(kVerifyConfig);
    CHECK(config.command == Command::Verify);
    CHECK(config.scenario == "jump-only");
    CHECK(config.params.at("lambda") == 2.0);
    CHECK(config.params.at("c") == 1.0);
    CHECK(config.steps == 1024);
    CHECK(config.seed == 7);
    CHECK(config.paths == 100);
    CHECK(config.mode == Representation::NonCentered);
    CHECK(config.format == OutputFormat::Csv);
}

TEST_CASE("unknown scenarios are rejected with their line number") {
    try {
        parse_config("command=verify\nscenario=nosuch\nN=4\n");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("nosuch") != std::string::npos);
    }
}

TEST_CASE("malformed values are rejected with their line number") {
    CHECK_THROWS_AS(parse_config("command=verify\nscenario=jump-only\nparams.lambda=2\n"
                                 "params.c=1\nN=-5\n"),
                    ConfigError);
    try {
        parse_config("N=-5\n");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 1);
    }
    CHECK_THROWS_AS(parse_config("command=verify\nscenario=jump-only\nparams.c=1\n"
                                 "params.lambda=abc\nN=4\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("bogus_key=1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("command=verify\nscenario=jump-only\nparams.c=1\n"
                                 "params.lambda=2\nN=4\nmode=weird\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("command=verify\nscenario=jump-only\nparams.nope=1\n"
                                 "params.c=1\nparams.lambda=2\nN=4\n"),
                    ConfigError);
    // missing required pieces
    CHECK_THROWS_AS(parse_config("command=verify\nscenario=jump-only\nparams.c=1\n"
                                 "params.lambda=2\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("command=verify\nscenario=jump-only\nparams.c=1\nN=4\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("command=converge\nscenario=jump-only\nparams.c=1\n"
                                 "params.lambda=2\nlevels=16,48\n"),
                    ConfigError);
}

TEST_CASE("comments and spacing are ignored") {
    const RunConfig config = parse_config(
        "  command = verify   # trailing comment\n"
        "# full-line comment\n"
        "\n"
        "scenario = jump-only\n"
        "params.lambda = 2\n"
        "params.c = 1\n"
        "N = 16\n");
    CHECK(config.steps == 16);
}

TEST_CASE("configs round-trip through serialization") {
    RunConfig config = parse_config(kVerifyConfig);
    CHECK(parse_config(serialize_config(config)) == config);

    const RunConfig converge = parse_config(
        "command=converge\nscenario=product-rule\nparams.alpha=0.1\nparams.beta=0.2\n"
        "params.a=0.3\nparams.b=0.4\nlevels=64,128,256\nM=50\nseed=11\nmode=centered\n"
        "format=json\nT=2\nz.0=1.5\n");
    CHECK(parse_config(serialize_config(converge)) == converge);
}

TEST_CASE("verify runs end to end and round-trips its numbers") {
    RunConfig config = parse_config(
        "command=verify\nscenario=affine-exact\nparams.c=3\nparams.psi=1\nN=64\nM=4\nseed=5\n");
    const RunResult result = run(config);
    CHECK(result.exit_code == 0);

    std::istringstream lines(result.output);
    std::string header, first;
    std::getline(lines, header);
    std::getline(lines, first);
    CHECK(header ==
          "seed,N,lhs,rhs,residual,drift_q,drift_transport,drift_diffusion,drift_cross,"
          "diffusion_d,diffusion_transport,jump_field,jump_g,ok");

    const auto cells = split_csv_line(first);
    REQUIRE(cells.size() == 14);
    // 17 significant digits reproduce the double exactly
    const ScenarioSpec spec = catalog("affine-exact", {{"c", 3.0}, {"psi", 1.0}});
    const ResidualReport rep = verify_path(spec, 64, 5);
    CHECK(std::stod(cells[2]) == rep.lhs);
    CHECK(std::stod(cells[4]) == rep.residual);
}

TEST_CASE("json output carries the same rows") {
    RunConfig config = parse_config(
        "command=verify\nscenario=affine-exact\nparams.c=3\nparams.psi=1\nN=32\nM=3\nseed=2\n"
        "format=json\n");
    const RunResult result = run(config);
    CHECK(result.exit_code == 0);
    const auto doc = nlohmann::json::parse(result.output);
    CHECK(doc["command"] == "verify");
    CHECK(doc["rows"].size() == 3);
    CHECK(doc["rows"][0].contains("residual"));
    CHECK(doc["rows"][0]["ok"] == true);
}

TEST_CASE("batch output is identical across thread counts") {
    RunConfig config = parse_config(
        "command=verify\nscenario=product-rule\nparams.alpha=0.1\nparams.beta=0.2\n"
        "params.a=0.3\nparams.b=0.4\nN=128\nM=12\nseed=9\n");
    config.threads = 1;
    const RunResult one = run(config);
    config.threads = 4;
    const RunResult four = run(config);
    CHECK(one.output == four.output);
}

TEST_CASE("convert audits the drift conversion and round-trip") {
    RunConfig config = parse_config("command=convert\nscenario=full-mix\nmode=centered\nN=16\n");
    const RunResult result = run(config);
    CHECK(result.exit_code == 0);
    CHECK(result.warning.empty());

    std::istringstream lines(result.output);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "t,a_orig,a_converted,a_roundtrip,q_orig,q_converted,q_roundtrip,ok");
    std::string row;
    std::size_t rows = 0;
    while (std::getline(lines, row)) {
        const auto cells = split_csv_line(row);
        REQUIRE(cells.size() == 8);
        CHECK(cells.back() == "1");
        CHECK(std::stod(cells[1]) != std::stod(cells[2]));  // conversion moves the drift
        ++rows;
    }
    CHECK(rows == 17);

    // converting to the representation the scenario is already in warns
    RunConfig noop = parse_config("command=convert\nscenario=full-mix\nN=4\n");
    CHECK_FALSE(run(noop).warning.empty());
}

TEST_CASE("converge run exits cleanly on an exact scenario") {
    RunConfig config = parse_config(
        "command=converge\nscenario=affine-exact\nparams.c=3\nparams.psi=1\n"
        "levels=16,32\nM=30\nseed=3\n");
    const RunResult result = run(config);
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("exact") != std::string::npos);
}

TEST_CASE("list-scenarios covers the catalog") {
    RunConfig config;
    config.command = Command::ListScenarios;
    const RunResult result = run(config);
    for (const auto& name : catalog_names())
        CHECK(result.output.find(name) != std::string::npos);
}
