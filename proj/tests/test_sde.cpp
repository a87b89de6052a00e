#include <doctest.h>

#include <cmath>

#include "itw/sde.hpp"

using namespace itw;

namespace {

ProcessCoefficients scalar_process(double a, double b) {
    ProcessCoefficients pc;
    pc.n = pc.m = 1;
    pc.drift = [a](double, std::span<double> out) { out[0] = a; };
    pc.diffusion = [b](double, std::span<double> out) { out[0] = b; };
    pc.jump = [](double, double mark, std::span<double> out) { out[0] = mark; };
    return pc;
}

const IntensitySpec no_jumps(0.0, MarkDistribution::point(0.0));

}  // namespace

TEST_CASE("constant drift integrates a Riemann sum exactly") {
    const ProcessCoefficients pc = scalar_process(1.0, 0.0);
    const WienerPath w = sample_wiener(TimeGrid(1.0, 16), 1, 4);
    const ProcessPath path = integrate_process(pc, w, {1.0, {}}, {0.0}, no_jumps);
    CHECK(path.state(16)[0] == 1.0);
}

TEST_CASE("unit diffusion telescopes to the terminal Wiener value") {
    const ProcessCoefficients pc = scalar_process(0.0, 1.0);
    const WienerPath w = sample_wiener(TimeGrid(1.0, 64), 1, 5);
    const ProcessPath path = integrate_process(pc, w, {1.0, {}}, {0.0}, no_jumps);
    double sum = 0.0;
    for (std::size_t j = 0; j < 64; ++j) sum += w.increment(j, 0);
    CHECK(path.state(64)[0] == sum);
}

TEST_CASE("a single jump shifts the state by its amplitude") {
    const ProcessCoefficients pc = scalar_process(0.0, 0.0);
    const WienerPath w = sample_wiener(TimeGrid(1.0, 8), 1, 6);
    const MarkedJumpStream jumps{1.0, {{0.5, 2.0}}};
    const ProcessPath path = integrate_process(pc, w, jumps, {1.0}, no_jumps);
    CHECK(path.state(8)[0] == 3.0);
    REQUIRE(path.ledger.size() == 1);
    CHECK(path.ledger[0].pre[0] == 1.0);
    CHECK(path.ledger[0].post[0] == 3.0);
    CHECK(path.ledger[0].step == 3);  // 0.5 lies in (3/8, 4/8]
}

TEST_CASE("ledger jumps equal the amplitude exactly") {
    ProcessCoefficients pc = scalar_process(0.4, 0.6);
    pc.jump = [](double t, double mark, std::span<double> out) { out[0] = mark * (1.0 + t); };
    const WienerPath w = sample_wiener(TimeGrid(1.0, 32), 1, 8);
    const IntensitySpec intensity(4.0, MarkDistribution::uniform(-0.5, 0.5));
    const MarkedJumpStream jumps = sample_jumps(intensity, 1.0, 17);
    REQUIRE(jumps.size() > 0);
    const ProcessPath path = integrate_process(pc, w, jumps, {0.0}, intensity);
    REQUIRE(path.ledger.size() == jumps.size());
    Vec g(1);
    for (const auto& rec : path.ledger) {
        pc.jump(rec.time, rec.mark, g);
        CHECK(rec.post[0] - rec.pre[0] == g[0]);
        CHECK(rec.theta >= 0.0);
        CHECK(rec.theta <= 1.0);
    }
}

TEST_CASE("centered integration equals integrating the converted coefficients") {
    const ScenarioSpec mix = catalog("full-mix", {});
    const ScenarioSpec centered = to_centered(mix).spec;
    const ScenarioSpec converted = to_noncentered(centered).spec;

    const WienerPath w = sample_wiener(TimeGrid(1.0, 256), 2, 12);
    const MarkedJumpStream jumps = sample_jumps(mix.intensity, 1.0, 13);

    const ProcessPath a =
        integrate_process(centered.process, w, jumps, centered.initial_state, centered.intensity);
    const ProcessPath b =
        integrate_process(converted.process, w, jumps, converted.initial_state, converted.intensity);
    for (std::size_t j = 0; j <= 256; ++j)
        CHECK(std::abs(a.state(j)[0] - b.state(j)[0]) <= 1e-14);
}

TEST_CASE("dimension mismatches are rejected") {
    const ProcessCoefficients pc = scalar_process(0.0, 1.0);
    const WienerPath w2 = sample_wiener(TimeGrid(1.0, 4), 2, 3);
    CHECK_THROWS_AS(integrate_process(pc, w2, {1.0, {}}, {0.0}, no_jumps), std::invalid_argument);
    const WienerPath w1 = sample_wiener(TimeGrid(1.0, 4), 1, 3);
    CHECK_THROWS_AS(integrate_process(pc, w1, {1.0, {}}, {0.0, 0.0}, no_jumps),
                    std::invalid_argument);
    CHECK_THROWS_AS(integrate_process(pc, w1, {2.0, {}}, {0.0}, no_jumps), std::invalid_argument);
}

TEST_CASE("divergence reports the offending step") {
    ProcessCoefficients pc = scalar_process(0.0, 0.0);
    pc.drift = [](double t, std::span<double> out) {
        out[0] = t > 0.5 ? std::numeric_limits<double>::infinity() : 0.0;
    };
    const WienerPath w = sample_wiener(TimeGrid(1.0, 10), 1, 2);
    try {
        integrate_process(pc, w, {1.0, {}}, {0.0}, no_jumps);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.step() == 6);  // first node with t > 0.5 is t_6 = 0.6
    }
}

TEST_CASE("two-dimensional states advance every component") {
    ProcessCoefficients pc;
    pc.n = 2;
    pc.m = 2;
    pc.drift = [](double, std::span<double> out) {
        out[0] = 1.0;
        out[1] = -1.0;
    };
    pc.diffusion = [](double, std::span<double> out) {
        // rows are state components, columns Wiener components
        out[0] = 1.0; out[1] = 0.0;
        out[2] = 0.0; out[3] = 2.0;
    };
    pc.jump = [](double, double, std::span<double> out) { out[0] = out[1] = 0.0; };
    const WienerPath w = sample_wiener(TimeGrid(1.0, 16), 2, 9);
    const ProcessPath path = integrate_process(pc, w, {1.0, {}}, {0.0, 0.0}, no_jumps);
    double w0 = 0.0, w1 = 0.0;
    for (std::size_t j = 0; j < 16; ++j) {
        w0 += w.increment(j, 0);
        w1 += w.increment(j, 1);
    }
    CHECK(path.state(16)[0] == doctest::Approx(1.0 + w0).epsilon(1e-14));
    CHECK(path.state(16)[1] == doctest::Approx(-1.0 + 2.0 * w1).epsilon(1e-14));
}

TEST_CASE("grid refinement shrinks the strong error by the refinement factor") {
    // Time-dependent (state-free) coefficients: the left-point rule has first
    // order pathwise error, so halving dt should roughly halve the error.
    ProcessCoefficients pc;
    pc.n = pc.m = 1;
    pc.drift = [](double t, std::span<double> out) { out[0] = std::sin(3.0 * t); };
    pc.diffusion = [](double t, std::span<double> out) { out[0] = 0.5 * std::cos(2.0 * t); };
    pc.jump = [](double, double, std::span<double> out) { out[0] = 0.0; };

    double err_coarse = 0.0, err_fine = 0.0;
    const int trials = 24;
    for (int trial = 0; trial < trials; ++trial) {
        WienerPath w = sample_wiener(TimeGrid(1.0, 128), 1, 5000 + trial);
        const ProcessPath coarse = integrate_process(pc, w, {1.0, {}}, {0.0}, no_jumps);
        w = refine(w, 2, 6000 + trial);
        const ProcessPath fine = integrate_process(pc, w, {1.0, {}}, {0.0}, no_jumps);
        w = refine(w, 2, 7000 + trial);
        w = refine(w, 2, 8000 + trial);
        w = refine(w, 2, 9000 + trial);
        const ProcessPath reference = integrate_process(pc, w, {1.0, {}}, {0.0}, no_jumps);

        const double ref = reference.state(w.grid.steps)[0];
        err_coarse += std::abs(coarse.state(128)[0] - ref);
        err_fine += std::abs(fine.state(256)[0] - ref);
    }
    const double ratio = err_coarse / err_fine;
    CHECK(ratio > 1.4);
    CHECK(ratio < 2.8);
}
