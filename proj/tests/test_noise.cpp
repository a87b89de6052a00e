#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "itw/noise.hpp"

using namespace itw;

namespace {

double sample_variance(const std::vector<double>& xs) {
    double mean = 0.0;
    for (const double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double acc = 0.0;
    for (const double x : xs) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(xs.size() - 1);
}

}  // namespace

TEST_CASE("wiener sampling is a pure function of the seed") {
    const TimeGrid grid(1.0, 2);
    const WienerPath one = sample_wiener(grid, 2, 42);
    const WienerPath two = sample_wiener(grid, 2, 42);
    REQUIRE(one.increments.size() == 4);
    CHECK(one.increments == two.increments);
    const WienerPath other = sample_wiener(grid, 2, 43);
    CHECK(one.increments != other.increments);
}

TEST_CASE("cumulative sum at the first node is zero") {
    const WienerPath w = sample_wiener(TimeGrid(2.0, 16), 3, 7);
    for (const double v : w.cumulative(0)) CHECK(v == 0.0);
}

TEST_CASE("invalid sampling dimensions are rejected") {
    CHECK_THROWS_AS(sample_wiener(TimeGrid(1.0, 4), 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(-1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(sample_jumps(IntensitySpec(1.0, MarkDistribution::point(1.0)), 0.0, 3),
                    std::invalid_argument);
}

TEST_CASE("wiener statistics match their closed forms over many seeds") {
    // W(1) over N(0, dt) increments has variance 1; 3 standard errors of the
    // sample variance over n draws is 3 sqrt(2/(n-1)). Single increments have
    // mean 0 and variance dt.
    const TimeGrid grid(1.0, 100);
    const std::size_t n = 10000;
    std::vector<double> terminal(n), single(n);
    double mean = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        const WienerPath w = sample_wiener(grid, 1, s);
        terminal[s] = w.cumulative(grid.steps)[0];
        single[s] = w.increment(42, 0);
        mean += terminal[s];
    }
    const double var = sample_variance(terminal);
    const double band = 3.0 * std::sqrt(2.0 / static_cast<double>(n - 1));
    CHECK(std::abs(var - 1.0) < band);
    CHECK(std::abs(mean / static_cast<double>(n)) < 3.0 / std::sqrt(static_cast<double>(n)));

    const double dt = grid.dt();
    const double inc_band = 3.0 * dt * std::sqrt(2.0 / static_cast<double>(n - 1));
    CHECK(std::abs(sample_variance(single) - dt) < inc_band);
}

TEST_CASE("zero intensity gives an empty stream") {
    const auto stream = sample_jumps(IntensitySpec(0.0, MarkDistribution::point(1.0)), 1.0, 9);
    CHECK(stream.events.empty());
}

TEST_CASE("jump times are strictly increasing in (0, T]") {
    const IntensitySpec intensity(6.0, MarkDistribution::uniform(0.0, 1.0));
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto stream = sample_jumps(intensity, 2.0, seed);
        double prev = 0.0;
        for (const auto& ev : stream.events) {
            CHECK(ev.time > prev);
            CHECK(ev.time <= 2.0);
            prev = ev.time;
        }
    }
}

TEST_CASE("jump count matches the Poisson mean over many seeds") {
    const IntensitySpec intensity(5.0, MarkDistribution::point(1.0));
    const std::size_t n = 10000;
    double total = 0.0;
    for (std::size_t s = 0; s < n; ++s)
        total += static_cast<double>(sample_jumps(intensity, 2.0, s).size());
    const double mean = total / static_cast<double>(n);
    const double band = 3.0 * std::sqrt(10.0 / static_cast<double>(n));
    CHECK(std::abs(mean - 10.0) < band);
}

TEST_CASE("mark integration is exact per family") {
    const IntensitySpec two_uniform(2.0, MarkDistribution::uniform(0.0, 1.0));
    CHECK(integrate_mark(two_uniform, [](double g) { return g; }) == doctest::Approx(1.0).epsilon(1e-14));

    const IntensitySpec three_uniform(3.0, MarkDistribution::uniform(0.0, 1.0));
    CHECK(std::abs(integrate_mark(three_uniform, [](double g) { return g * g; }) - 1.0) < 1e-12);

    // h == 1 integrates to the total mass for any family.
    const IntensitySpec disc(1.7, MarkDistribution::discrete({-1.0, 2.0}, {1.0, 3.0}));
    CHECK(integrate_mark(disc, [](double) { return 1.0; }) == doctest::Approx(1.7).epsilon(1e-14));
    CHECK(integrate_mark(two_uniform, [](double) { return 1.0; }) == doctest::Approx(2.0).epsilon(1e-14));

    CHECK(integrate_mark(IntensitySpec(4.0, MarkDistribution::point(0.25)),
                         [](double g) { return g * g; }) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(integrate_mark(disc, [](double g) { return g; }) ==
          doctest::Approx(1.7 * (-1.0 * 0.25 + 2.0 * 0.75)).epsilon(1e-14));
}

TEST_CASE("non-finite integrands violate the integrability contract") {
    const IntensitySpec intensity(1.0, MarkDistribution::uniform(0.0, 1.0));
    CHECK_THROWS_AS(integrate_mark(intensity, [](double g) { return 1.0 / (g - g); }),
                    ContractViolation);
}

TEST_CASE("mark sampling hits only the support") {
    auto rng = make_engine(5);
    const auto disc = MarkDistribution::discrete({-1.0, 0.5, 2.0}, {0.2, 0.5, 0.3});
    for (int i = 0; i < 200; ++i) {
        const double g = disc.sample(rng);
        CHECK((g == -1.0 || g == 0.5 || g == 2.0));
    }
    const auto uni = MarkDistribution::uniform(-0.25, 0.75);
    for (int i = 0; i < 200; ++i) {
        const double g = uni.sample(rng);
        CHECK(g >= -0.25);
        CHECK(g <= 0.75);
    }
}

TEST_CASE("refinement preserves coarse block sums") {
    const WienerPath coarse = sample_wiener(TimeGrid(1.0, 8), 2, 11);
    const WienerPath fine = refine(coarse, 2, 99);
    REQUIRE(fine.grid.steps == 16);
    for (std::size_t j = 0; j < 8; ++j) {
        for (std::size_t k = 0; k < 2; ++k) {
            const double block = fine.increment(2 * j, k) + fine.increment(2 * j + 1, k);
            CHECK(std::abs(block - coarse.increment(j, k)) <= 1e-15);
        }
    }
    // Telescoping: the refined path ends at the same terminal value.
    CHECK(fine.cumulative(16)[0] == doctest::Approx(coarse.cumulative(8)[0]).epsilon(1e-13));
    CHECK_THROWS_AS(refine(coarse, 1, 0), std::invalid_argument);
}

TEST_CASE("refinement block sums hold across random shapes") {
    auto rng = make_engine(123);
    std::uniform_int_distribution<std::size_t> pick_steps(1, 64), pick_factor(2, 4), pick_dim(1, 3);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t steps = pick_steps(rng), factor = pick_factor(rng), dim = pick_dim(rng);
        const WienerPath coarse = sample_wiener(TimeGrid(1.5, steps), dim, 1000 + trial);
        const WienerPath fine = refine(coarse, factor, 2000 + trial);
        REQUIRE(fine.grid.steps == steps * factor);
        double worst = 0.0;
        for (std::size_t j = 0; j < steps; ++j) {
            for (std::size_t k = 0; k < dim; ++k) {
                double block = 0.0;
                for (std::size_t s = 0; s < factor; ++s)
                    block += fine.increment(j * factor + s, k);
                worst = std::max(worst, std::abs(block - coarse.increment(j, k)));
            }
        }
        CHECK(worst <= 1e-15);
    }
}

TEST_CASE("bridge fill-in has the conditional variance of a Brownian bridge") {
    // First sub-increment of a refined block: variance h (1 - h/dt) given the
    // coarse increment, estimated over independent refinement seeds.
    const WienerPath coarse = sample_wiener(TimeGrid(1.0, 4), 1, 21);
    const std::size_t factor = 2, n = 10000;
    const double h = coarse.grid.dt() / static_cast<double>(factor);
    const double expected = h * (1.0 - h / coarse.grid.dt());
    std::vector<double> first(n);
    for (std::size_t s = 0; s < n; ++s) first[s] = refine(coarse, factor, s).increment(0, 0);
    const double var = sample_variance(first);
    const double band = 3.0 * expected * std::sqrt(2.0 / static_cast<double>(n - 1));
    CHECK(std::abs(var - expected) < band);
}

TEST_CASE("step lookup inverts the node map") {
    const TimeGrid grid(1.0, 7);  // dt not exactly representable
    for (std::size_t j = 0; j < grid.steps; ++j) {
        const double inside = 0.5 * (grid.node(j) + grid.node(j + 1));
        CHECK(grid.step_containing(inside) == j);
        CHECK(grid.step_containing(grid.node(j + 1)) == j);
    }
    CHECK_THROWS_AS(grid.step_containing(0.0), std::invalid_argument);
    CHECK_THROWS_AS(grid.step_containing(1.5), std::invalid_argument);
}
