#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "itw/rng.hpp"
#include "itw/types.hpp"

namespace itw {

/// Uniform partition of [0, T] into N steps, nodes t_j = j * dt.
struct TimeGrid {
    double horizon = 1.0;
    std::size_t steps = 1;

    TimeGrid() = default;
    TimeGrid(double T, std::size_t N);

    double dt() const { return horizon / static_cast<double>(steps); }

    /// t_j; the final node is pinned to the horizon.
    double node(std::size_t j) const {
        return j == steps ? horizon : dt() * static_cast<double>(j);
    }

    /// Index j of the step (t_j, t_{j+1}] containing tau in (0, T].
    std::size_t step_containing(double tau) const;

    bool operator==(const TimeGrid&) const = default;
};

/// Discretized m-dimensional Wiener path stored as per-step increments,
/// increment(j, k) ~ N(0, dt), row-major over (step, component).
struct WienerPath {
    TimeGrid grid;
    std::size_t dim = 1;
    std::vector<double> increments;

    double increment(std::size_t j, std::size_t k) const { return increments[j * dim + k]; }
    double& increment(std::size_t j, std::size_t k) { return increments[j * dim + k]; }

    /// W(t_j), the left-to-right cumulative sum of increments.
    Vec cumulative(std::size_t j) const;
};

struct JumpEvent {
    double time = 0.0;
    double mark = 0.0;
};

/// Marked jump events on (0, T], strictly increasing in time.
struct MarkedJumpStream {
    double horizon = 1.0;
    std::vector<JumpEvent> events;

    std::size_t size() const { return events.size(); }
};

namespace detail {

struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1], order 16 (polynomially exact to degree 31).
const Quadrature& gauss_legendre_16();

}  // namespace detail

/// Normalized mark law of the jump measure. Three families, each with a
/// sampler and an exact expectation rule (point mass: direct; uniform
/// interval: fixed-order Gauss-Legendre, polynomially exact; finite discrete
/// set: weighted sum).
class MarkDistribution {
public:
    static MarkDistribution point(double atom);
    static MarkDistribution uniform(double lo, double hi);
    static MarkDistribution discrete(std::vector<double> atoms, std::vector<double> weights);

    double sample(RngEngine& rng) const;

    /// Visits the (mark, weight) pairs of the expectation rule; weights sum
    /// to one. This is the allocation-free path used by evaluation loops.
    template <class F>
    void for_each_atom(F&& f) const {
        switch (family_) {
            case Family::Point:
                f(lo_, 1.0);
                return;
            case Family::Uniform: {
                const auto& q = detail::gauss_legendre_16();
                const double half = 0.5 * (hi_ - lo_);
                const double mid = 0.5 * (hi_ + lo_);
                for (std::size_t i = 0; i < q.nodes.size(); ++i)
                    f(mid + half * q.nodes[i], 0.5 * q.weights[i]);
                return;
            }
            case Family::Discrete:
                for (std::size_t i = 0; i < atoms_.size(); ++i) f(atoms_[i], weights_[i]);
                return;
        }
    }

    /// E[h(mark)]; throws ContractViolation if h is non-finite on the support.
    double expectation(const std::function<double(double)>& h) const;

    /// Same rule applied component-wise to a vector-valued h writing into out.
    void expectation_vec(const std::function<void(double, std::span<double>)>& h,
                         std::span<double> out) const;

    /// Representative marks (atoms, or interval endpoints and midpoint).
    std::vector<double> support_probes() const;

    std::string describe() const;

private:
    enum class Family { Point, Uniform, Discrete };

    Family family_ = Family::Point;
    double lo_ = 0.0, hi_ = 0.0;       // uniform bounds, or the point atom in lo_
    std::vector<double> atoms_;        // discrete family
    std::vector<double> cumweights_;   // normalized cumulative weights
    std::vector<double> weights_;
};

/// Intensity measure of the jump noise: a finite total rate times a
/// normalized mark law. Finite rate keeps the event stream compound-Poisson
/// and every mark integral absolutely convergent.
struct IntensitySpec {
    double rate = 0.0;
    MarkDistribution marks = MarkDistribution::point(0.0);

    IntensitySpec() = default;
    IntensitySpec(double lambda, MarkDistribution m);
};

/// N x dim independent Gaussian increments of variance dt; pure in
/// (grid, dim, seed).
WienerPath sample_wiener(const TimeGrid& grid, std::size_t dim, std::uint64_t seed);

/// Compound-Poisson event stream: count ~ Poisson(rate * T), times uniform
/// on (0, T] sorted strictly, marks i.i.d. from the mark law.
MarkedJumpStream sample_jumps(const IntensitySpec& intensity, double horizon, std::uint64_t seed);

/// Integral of h against the intensity measure, rate * E[h(mark)].
double integrate_mark(const IntensitySpec& intensity, const std::function<double(double)>& h);

/// Vector-valued variant writing rate * E[h(mark)] into out.
void integrate_mark_vec(const IntensitySpec& intensity,
                        const std::function<void(double, std::span<double>)>& h,
                        std::span<double> out);

/// Conditional (Brownian-bridge) fill-in onto a grid with factor-times more
/// steps. Block sums reproduce the coarse increments exactly; jump streams
/// carry exact event times and need no counterpart.
WienerPath refine(const WienerPath& path, std::size_t factor, std::uint64_t seed);

}  // namespace itw
