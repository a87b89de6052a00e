#include "itw/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "itw/wentzell.hpp"

namespace itw {

namespace {

using Json = nlohmann::ordered_json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Json>> rows;  // cells: number, string, bool or null

    std::string render_csv() const {
        std::ostringstream os;
        for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
        os << "\n";
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) os << ",";
                const Json& cell = row[c];
                if (cell.is_null()) continue;
                if (cell.is_number_float()) os << fmt17(cell.get<double>());
                else if (cell.is_number_unsigned()) os << cell.get<std::uint64_t>();
                else if (cell.is_boolean()) os << (cell.get<bool>() ? 1 : 0);
                else os << csv_escape(cell.get<std::string>());
            }
            os << "\n";
        }
        return os.str();
    }

    std::string render_json(const RunConfig& config) const {
        Json doc;
        doc["command"] = to_string(config.command);
        if (!config.scenario.empty()) doc["scenario"] = config.scenario;
        doc["seed"] = config.seed;
        Json out_rows = Json::array();
        for (const auto& row : rows) {
            Json obj;
            for (std::size_t c = 0; c < row.size(); ++c) obj[header[c]] = row[c];
            out_rows.push_back(std::move(obj));
        }
        doc["rows"] = std::move(out_rows);
        return doc.dump(2) + "\n";
    }
};

Table run_verify(const RunConfig& config, bool& all_ok) {
    if (!config.steps) throw std::invalid_argument("verify needs N");
    const ScenarioSpec spec = build_scenario(config);
    const auto reports = verify_many(spec, *config.steps, config.paths, config.seed,
                                     config.mode, config.threads);
    Table t;
    t.header = {"seed", "N", "lhs", "rhs", "residual",
                "drift_q", "drift_transport", "drift_diffusion", "drift_cross",
                "diffusion_d", "diffusion_transport", "jump_field", "jump_g", "ok"};
    for (const auto& r : reports) {
        const bool ok = !spec.exactness_tol || std::abs(r.residual) <= *spec.exactness_tol;
        all_ok = all_ok && ok;
        t.rows.push_back({r.seed, r.steps, r.lhs, r.rhs, r.residual,
                          r.terms.drift_q, r.terms.drift_transport, r.terms.drift_diffusion,
                          r.terms.drift_cross, r.terms.diffusion_d, r.terms.diffusion_transport,
                          r.terms.jump_field, r.terms.jump_g, ok});
    }
    return t;
}

Table run_converge(const RunConfig& config, bool& all_ok) {
    const ScenarioSpec spec = build_scenario(config);
    const ConvergenceTable table = convergence_study(
        spec, config.levels, config.paths, config.seed, config.mode, config.threads);
    Table t;
    t.header = {"level", "N", "dt", "paths", "rms_residual", "max_residual", "order", "exact", "ok"};
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const ConvergenceRow& row = table.rows[r];
        // A level passes when its RMS keeps shrinking or sits on the
        // machine-exactness floor.
        const bool ok = r == 0 || row.exact ||
                        row.rms_residual < table.rows[r - 1].rms_residual;
        all_ok = all_ok && ok;
        Json order = row.order;
        if (std::isnan(row.order)) order = nullptr;
        t.rows.push_back({static_cast<std::uint64_t>(r), row.steps, row.dt, row.paths,
                          row.rms_residual, row.max_residual, order, row.exact, ok});
    }
    return t;
}

Table run_convert(const RunConfig& config, bool& all_ok, std::string& warning) {
    const ScenarioSpec spec = build_scenario(config);
    const Representation target = config.mode;

    const ConversionResult conv = target == Representation::Centered ? to_centered(spec)
                                                                     : to_noncentered(spec);
    if (conv.already_in_target_form)
        warning = "scenario '" + spec.name + "' is already " + to_string(target) +
                  "; conversion is a no-op";
    const ConversionResult back = target == Representation::Centered
                                      ? to_noncentered(conv.spec)
                                      : to_centered(conv.spec);

    const std::size_t n = spec.n;
    const std::size_t nodes = config.steps.value_or(100);
    const TimeGrid grid(spec.horizon, nodes);
    constexpr double tol = 1e-14;

    Table t;
    t.header = {"t"};
    const char* blocks[] = {"a_orig", "a_converted", "a_roundtrip"};
    for (const char* b : blocks) {
        for (std::size_t i = 0; i < n; ++i)
            t.header.push_back(n == 1 ? std::string(b) : std::string(b) + "." + std::to_string(i));
    }
    t.header.insert(t.header.end(), {"q_orig", "q_converted", "q_roundtrip", "ok"});

    Vec a0(n), a1(n), a2(n);
    for (std::size_t j = 0; j <= nodes; ++j) {
        const double tt = grid.node(j);
        spec.process.drift(tt, a0);
        conv.spec.process.drift(tt, a1);
        back.spec.process.drift(tt, a2);
        const double q0 = spec.field.drift(tt, spec.initial_state);
        const double q1 = conv.spec.field.drift(tt, spec.initial_state);
        const double q2 = back.spec.field.drift(tt, spec.initial_state);

        bool ok = std::abs(q2 - q0) <= tol * std::max(1.0, std::abs(q0));
        for (std::size_t i = 0; i < n; ++i)
            ok = ok && std::abs(a2[i] - a0[i]) <= tol * std::max(1.0, std::abs(a0[i]));
        all_ok = all_ok && ok;

        std::vector<Json> row = {tt};
        for (const Vec* v : {&a0, &a1, &a2})
            for (std::size_t i = 0; i < n; ++i) row.push_back((*v)[i]);
        row.insert(row.end(), {q0, q1, q2, ok});
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table run_list() {
    Table t;
    t.header = {"name", "n", "m", "representation", "required", "optional", "summary"};
    for (const auto& name : catalog_names()) {
        const CatalogInfo info = catalog_info(name);
        std::vector<std::string> opts;
        for (const auto& [key, value] : info.defaults) opts.push_back(key + "=" + fmt_short(value));
        t.rows.push_back({name, static_cast<std::uint64_t>(info.n),
                          static_cast<std::uint64_t>(info.m), to_string(info.representation),
                          join(info.required, ";"), join(opts, ";"), info.summary});
    }
    return t;
}

}  // namespace

RunResult run(const RunConfig& config) {
    bool all_ok = true;
    std::string warning;
    Table table;
    switch (config.command) {
        case Command::Verify:
            table = run_verify(config, all_ok);
            break;
        case Command::Converge:
            table = run_converge(config, all_ok);
            break;
        case Command::Convert:
            table = run_convert(config, all_ok, warning);
            break;
        case Command::ListScenarios:
            table = run_list();
            break;
    }

    RunResult result;
    result.warning = warning;
    result.exit_code = all_ok ? 0 : 1;
    result.output = config.format == OutputFormat::Csv ? table.render_csv()
                                                       : table.render_json(config);
    result.out_path = config.out_path;
    if (!config.out_path.empty()) {
        std::ofstream out(config.out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open output file " + config.out_path);
        out << result.output;
    }
    return result;
}

}  // namespace itw
