#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "itw/runner.hpp"
#include "itw/wentzell.hpp"

namespace py = pybind11;
using namespace itw;

namespace {

Representation parse_mode(const std::string& mode) {
    if (mode == "centered") return Representation::Centered;
    if (mode == "non-centered") return Representation::NonCentered;
    throw std::invalid_argument("mode must be 'centered' or 'non-centered'");
}

py::array_t<double> increments_array(const WienerPath& w) {
    py::array_t<double> arr({w.grid.steps, w.dim});
    std::copy(w.increments.begin(), w.increments.end(), arr.mutable_data());
    return arr;
}

}  // namespace

PYBIND11_MODULE(itowentzell, m) {
    m.doc() = "Jump-diffusion co-simulation and pathwise verification of the "
              "generalized Ito-Wentzell chain rule";

    py::class_<TimeGrid>(m, "TimeGrid")
        .def(py::init<double, std::size_t>(), py::arg("horizon"), py::arg("steps"))
        .def_readonly("horizon", &TimeGrid::horizon)
        .def_readonly("steps", &TimeGrid::steps)
        .def_property_readonly("dt", &TimeGrid::dt)
        .def("node", &TimeGrid::node);

    py::class_<WienerPath>(m, "WienerPath")
        .def_property_readonly("grid", [](const WienerPath& w) { return w.grid; })
        .def_readonly("dim", &WienerPath::dim)
        .def_property_readonly("increments", &increments_array)
        .def("cumulative", &WienerPath::cumulative, py::arg("node"));

    py::class_<MarkDistribution>(m, "MarkDistribution")
        .def_static("point", &MarkDistribution::point, py::arg("atom"))
        .def_static("uniform", &MarkDistribution::uniform, py::arg("lo"), py::arg("hi"))
        .def_static("discrete", &MarkDistribution::discrete, py::arg("atoms"), py::arg("weights"))
        .def("__repr__", &MarkDistribution::describe);

    py::class_<IntensitySpec>(m, "IntensitySpec")
        .def(py::init<double, MarkDistribution>(), py::arg("rate"), py::arg("marks"))
        .def_readonly("rate", &IntensitySpec::rate);

    py::class_<ScenarioSpec>(m, "ScenarioSpec")
        .def_readonly("name", &ScenarioSpec::name)
        .def_readonly("n", &ScenarioSpec::n)
        .def_readonly("m", &ScenarioSpec::m)
        .def_readonly("horizon", &ScenarioSpec::horizon)
        .def_readonly("initial_state", &ScenarioSpec::initial_state)
        .def_property_readonly("representation",
                               [](const ScenarioSpec& s) { return std::string(to_string(s.representation())); })
        .def("__repr__", [](const ScenarioSpec& s) {
            return "<ScenarioSpec '" + s.name + "' n=" + std::to_string(s.n) +
                   " m=" + std::to_string(s.m) + " " + to_string(s.representation()) + ">";
        });

    py::class_<TermAccumulators>(m, "TermAccumulators")
        .def_readonly("drift_q", &TermAccumulators::drift_q)
        .def_readonly("drift_transport", &TermAccumulators::drift_transport)
        .def_readonly("drift_diffusion", &TermAccumulators::drift_diffusion)
        .def_readonly("drift_cross", &TermAccumulators::drift_cross)
        .def_readonly("diffusion_d", &TermAccumulators::diffusion_d)
        .def_readonly("diffusion_transport", &TermAccumulators::diffusion_transport)
        .def_readonly("jump_field", &TermAccumulators::jump_field)
        .def_readonly("jump_g", &TermAccumulators::jump_g)
        .def("sum", &TermAccumulators::sum);

    py::class_<ResidualReport>(m, "ResidualReport")
        .def_readonly("lhs", &ResidualReport::lhs)
        .def_readonly("rhs", &ResidualReport::rhs)
        .def_readonly("residual", &ResidualReport::residual)
        .def_readonly("terms", &ResidualReport::terms)
        .def_readonly("steps", &ResidualReport::steps)
        .def_readonly("events", &ResidualReport::events)
        .def_readonly("seed", &ResidualReport::seed)
        .def("__repr__", [](const ResidualReport& r) {
            return "<ResidualReport residual=" + std::to_string(r.residual) +
                   " steps=" + std::to_string(r.steps) + ">";
        });

    py::class_<ConvergenceRow>(m, "ConvergenceRow")
        .def_readonly("steps", &ConvergenceRow::steps)
        .def_readonly("dt", &ConvergenceRow::dt)
        .def_readonly("paths", &ConvergenceRow::paths)
        .def_readonly("rms_residual", &ConvergenceRow::rms_residual)
        .def_readonly("max_residual", &ConvergenceRow::max_residual)
        .def_readonly("order", &ConvergenceRow::order)
        .def_readonly("exact", &ConvergenceRow::exact);

    m.def("scenario_names", &catalog_names, "Names of the built-in scenarios");
    m.def(
        "catalog",
        [](const std::string& name, const ParamMap& params) { return catalog(name, params); },
        py::arg("name"), py::arg("params") = ParamMap{},
        "Build a built-in scenario from its parameter map");
    m.def(
        "to_centered",
        [](const ScenarioSpec& s) {
            const auto r = to_centered(s);
            return py::make_tuple(r.spec, r.already_in_target_form);
        },
        py::arg("spec"), "Returns (converted spec, was_noop)");
    m.def(
        "to_noncentered",
        [](const ScenarioSpec& s) {
            const auto r = to_noncentered(s);
            return py::make_tuple(r.spec, r.already_in_target_form);
        },
        py::arg("spec"), "Returns (converted spec, was_noop)");

    m.def("sample_wiener", &sample_wiener, py::arg("grid"), py::arg("dim"), py::arg("seed"));
    m.def(
        "sample_jumps",
        [](const IntensitySpec& intensity, double horizon, std::uint64_t seed) {
            const auto stream = sample_jumps(intensity, horizon, seed);
            std::vector<std::pair<double, double>> events;
            events.reserve(stream.size());
            for (const auto& ev : stream.events) events.emplace_back(ev.time, ev.mark);
            return events;
        },
        py::arg("intensity"), py::arg("horizon"), py::arg("seed"),
        "Sorted (time, mark) pairs of one compound-Poisson draw");
    m.def("integrate_mark", &integrate_mark, py::arg("intensity"), py::arg("h"),
          "Integral of h against the intensity measure");
    m.def("refine", &refine, py::arg("path"), py::arg("factor"), py::arg("seed"),
          "Brownian-bridge refinement preserving coarse block sums");

    m.def(
        "verify_path",
        [](const ScenarioSpec& spec, std::size_t steps, std::uint64_t seed, const std::string& mode) {
            return verify_path(spec, steps, seed, parse_mode(mode));
        },
        py::arg("spec"), py::arg("steps"), py::arg("seed"), py::arg("mode") = "non-centered",
        "Pathwise chain-rule verification on fresh noise");
    m.def(
        "convergence_study",
        [](const ScenarioSpec& spec, const std::vector<std::size_t>& levels, std::size_t paths,
           std::uint64_t seed, const std::string& mode, unsigned threads) {
            return convergence_study(spec, levels, paths, seed, parse_mode(mode), threads).rows;
        },
        py::arg("spec"), py::arg("levels"), py::arg("paths"), py::arg("seed"),
        py::arg("mode") = "non-centered", py::arg("threads") = 1,
        "Residual statistics across nested step counts on shared trajectories");

    m.def(
        "run_config",
        [](const std::string& text) {
            const RunConfig config = parse_config(text);
            const RunResult result = run(config);
            return py::make_tuple(result.exit_code, result.output);
        },
        py::arg("text"), "Parse a config text and run it; returns (exit_code, rendered table)");
}
