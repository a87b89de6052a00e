#include "itw/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace itw {

std::string ContractViolation::format(const std::string& c, double t, const Vec& x) {
    std::ostringstream os;
    os << "coefficient " << c << " evaluated non-finite at t=" << t << ", x=(";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    return os.str();
}

TimeGrid::TimeGrid(double T, std::size_t N) : horizon(T), steps(N) {
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("horizon must be positive and finite");
    if (N == 0) throw std::invalid_argument("step count must be positive");
}

std::size_t TimeGrid::step_containing(double tau) const {
    if (!(tau > 0.0) || tau > horizon)
        throw std::invalid_argument("event time outside (0, T]");
    const double guess = std::ceil(tau / dt()) - 1.0;
    auto j = static_cast<std::size_t>(std::clamp(guess, 0.0, static_cast<double>(steps - 1)));
    // Settle rounding at node boundaries against the same node() values the
    // integrators compare with, keeping tau in (t_j, t_{j+1}].
    while (j > 0 && tau <= node(j)) --j;
    while (j + 1 < steps && tau > node(j + 1)) ++j;
    return j;
}

Vec WienerPath::cumulative(std::size_t j) const {
    Vec w(dim, 0.0);
    for (std::size_t i = 0; i < j; ++i)
        for (std::size_t k = 0; k < dim; ++k) w[k] += increment(i, k);
    return w;
}

// ---------------------------------------------------------------------------
// Mark distributions

namespace detail {
namespace {

// Newton iteration on the Legendre recurrence.
Quadrature make_gauss_legendre(std::size_t order) {
    Quadrature q;
    q.nodes.resize(order);
    q.weights.resize(order);
    for (std::size_t i = 0; i < order; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(order) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= order; ++k) {
                const double kk = static_cast<double>(k);
                const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(order) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        q.nodes[i] = x;
        q.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return q;
}

}  // namespace

const Quadrature& gauss_legendre_16() {
    static const Quadrature q = make_gauss_legendre(16);
    return q;
}

}  // namespace detail

namespace {

[[noreturn]] void throw_nonfinite_mark(double mark) {
    std::ostringstream os;
    os << "mark integrand non-finite at mark=" << mark
       << " (integrability contract violated)";
    throw ContractViolation(os.str());
}

double checked(double v, double mark) {
    if (!std::isfinite(v)) throw_nonfinite_mark(mark);
    return v;
}

}  // namespace

MarkDistribution MarkDistribution::point(double atom) {
    if (!std::isfinite(atom)) throw std::invalid_argument("point mark must be finite");
    MarkDistribution d;
    d.family_ = Family::Point;
    d.lo_ = atom;
    return d;
}

MarkDistribution MarkDistribution::uniform(double lo, double hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw std::invalid_argument("uniform mark bounds must be finite with lo < hi");
    MarkDistribution d;
    d.family_ = Family::Uniform;
    d.lo_ = lo;
    d.hi_ = hi;
    return d;
}

MarkDistribution MarkDistribution::discrete(std::vector<double> atoms, std::vector<double> weights) {
    if (atoms.empty() || atoms.size() != weights.size())
        throw std::invalid_argument("discrete marks need matching non-empty atoms and weights");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("weights must be non-negative");
        total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("weights must not all vanish");
    for (double a : atoms)
        if (!std::isfinite(a)) throw std::invalid_argument("atoms must be finite");

    MarkDistribution d;
    d.family_ = Family::Discrete;
    d.atoms_ = std::move(atoms);
    d.weights_.resize(d.atoms_.size());
    d.cumweights_.resize(d.atoms_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < d.atoms_.size(); ++i) {
        d.weights_[i] = weights[i] / total;
        acc += d.weights_[i];
        d.cumweights_[i] = acc;
    }
    d.cumweights_.back() = 1.0;
    return d;
}

double MarkDistribution::sample(RngEngine& rng) const {
    switch (family_) {
        case Family::Point:
            return lo_;
        case Family::Uniform: {
            std::uniform_real_distribution<double> u(lo_, hi_);
            return u(rng);
        }
        case Family::Discrete: {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            const double p = u(rng);
            const auto it = std::upper_bound(cumweights_.begin(), cumweights_.end(), p);
            const auto idx = std::min<std::size_t>(
                static_cast<std::size_t>(it - cumweights_.begin()), atoms_.size() - 1);
            return atoms_[idx];
        }
    }
    return lo_;
}

double MarkDistribution::expectation(const std::function<double(double)>& h) const {
    double acc = 0.0;
    for_each_atom([&](double mark, double weight) { acc += weight * checked(h(mark), mark); });
    return acc;
}

void MarkDistribution::expectation_vec(const std::function<void(double, std::span<double>)>& h,
                                       std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    Vec buf(out.size(), 0.0);
    for_each_atom([&](double mark, double weight) {
        h(mark, buf);
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (!std::isfinite(buf[i])) throw_nonfinite_mark(mark);
            out[i] += weight * buf[i];
        }
    });
}

std::vector<double> MarkDistribution::support_probes() const {
    switch (family_) {
        case Family::Point:
            return {lo_};
        case Family::Uniform:
            return {lo_, 0.5 * (lo_ + hi_), hi_};
        case Family::Discrete:
            return atoms_;
    }
    return {};
}

std::string MarkDistribution::describe() const {
    std::ostringstream os;
    switch (family_) {
        case Family::Point:
            os << "point(" << lo_ << ")";
            break;
        case Family::Uniform:
            os << "uniform(" << lo_ << ";" << hi_ << ")";
            break;
        case Family::Discrete: {
            os << "discrete(";
            for (std::size_t i = 0; i < atoms_.size(); ++i)
                os << (i ? " " : "") << atoms_[i] << ":" << weights_[i];
            os << ")";
            break;
        }
    }
    return os.str();
}

IntensitySpec::IntensitySpec(double lambda, MarkDistribution m) : rate(lambda), marks(std::move(m)) {
    if (!(rate >= 0.0) || !std::isfinite(rate))
        throw std::invalid_argument("intensity rate must be finite and non-negative");
}

// ---------------------------------------------------------------------------
// Samplers

WienerPath sample_wiener(const TimeGrid& grid, std::size_t dim, std::uint64_t seed) {
    if (dim == 0) throw std::invalid_argument("Wiener dimension must be positive");
    if (grid.steps == 0) throw std::invalid_argument("grid must have at least one step");

    WienerPath path;
    path.grid = grid;
    path.dim = dim;
    path.increments.resize(grid.steps * dim);

    auto rng = make_engine(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(grid.dt()));
    for (double& dw : path.increments) dw = gauss(rng);
    return path;
}

MarkedJumpStream sample_jumps(const IntensitySpec& intensity, double horizon, std::uint64_t seed) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw std::invalid_argument("horizon must be positive and finite");

    MarkedJumpStream stream;
    stream.horizon = horizon;
    if (intensity.rate == 0.0) return stream;

    auto rng = make_engine(seed);
    std::poisson_distribution<long long> count_dist(intensity.rate * horizon);
    const auto count = static_cast<std::size_t>(count_dist(rng));

    std::uniform_real_distribution<double> u(0.0, horizon);
    std::vector<double> times(count);
    for (double& t : times) t = horizon - u(rng);  // lands in (0, T]
    std::sort(times.begin(), times.end());

    // Ties have probability zero but are possible in floating point; the
    // later event is re-drawn until the stream is strictly increasing.
    for (std::size_t i = 1; i < times.size(); ++i) {
        while (times[i] <= times[i - 1]) {
            times[i] = horizon - u(rng);
            std::sort(times.begin() + static_cast<std::ptrdiff_t>(i), times.end());
        }
    }

    stream.events.resize(count);
    for (std::size_t i = 0; i < count; ++i)
        stream.events[i] = {times[i], intensity.marks.sample(rng)};
    return stream;
}

double integrate_mark(const IntensitySpec& intensity, const std::function<double(double)>& h) {
    if (intensity.rate == 0.0) return 0.0;
    return intensity.rate * intensity.marks.expectation(h);
}

void integrate_mark_vec(const IntensitySpec& intensity,
                        const std::function<void(double, std::span<double>)>& h,
                        std::span<double> out) {
    if (intensity.rate == 0.0) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    intensity.marks.expectation_vec(h, out);
    for (double& v : out) v *= intensity.rate;
}

WienerPath refine(const WienerPath& path, std::size_t factor, std::uint64_t seed) {
    if (factor < 2) throw std::invalid_argument("refinement factor must be at least 2");

    WienerPath fine;
    fine.grid = TimeGrid(path.grid.horizon, path.grid.steps * factor);
    fine.dim = path.dim;
    fine.increments.resize(fine.grid.steps * fine.dim);

    auto rng = make_engine(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double h = fine.grid.dt();

    // Sequential conditional fill: given the remaining block sum R over r
    // sub-steps, the next increment is N(R / r, h (r-1)/r); the last one is
    // the exact remainder, so block sums are preserved by construction.
    for (std::size_t j = 0; j < path.grid.steps; ++j) {
        for (std::size_t k = 0; k < path.dim; ++k) {
            double remaining = path.increment(j, k);
            for (std::size_t s = 0; s + 1 < factor; ++s) {
                const double r = static_cast<double>(factor - s);
                const double sd = std::sqrt(h * (r - 1.0) / r);
                const double d = remaining / r + sd * gauss(rng);
                fine.increment(j * factor + s, k) = d;
                remaining -= d;
            }
            fine.increment(j * factor + factor - 1, k) = remaining;
        }
    }
    return fine;
}

}  // namespace itw
