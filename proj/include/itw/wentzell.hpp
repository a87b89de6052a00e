#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "itw/field.hpp"
#include "itw/sde.hpp"
#include "itw/scenario.hpp"
#include "itw/types.hpp"

namespace itw {

/// Per-term breakdown of the assembled right-hand side of the stochastic
/// chain rule for F(t, x(t)).
struct TermAccumulators {
    double drift_q = 0.0;             // Q dt
    double drift_transport = 0.0;     // a . grad F dt
    double drift_diffusion = 0.0;     // 1/2 b_k . hess F . b_k dt
    double drift_cross = 0.0;         // b_k . grad D_k dt
    double diffusion_d = 0.0;         // D_k dW_k
    double diffusion_transport = 0.0; // b_k . grad F dW_k
    double jump_field = 0.0;          // F(x + g) - F(x) over events
    double jump_g = 0.0;              // G at the shifted point over events

    double sum() const {
        return drift_q + drift_transport + drift_diffusion + drift_cross +
               diffusion_d + diffusion_transport + jump_field + jump_g;
    }

    TermAccumulators& operator+=(const TermAccumulators& o);
};

/// Result of one pathwise verification: the directly evaluated field
/// increment (lhs), the assembled chain-rule increments (rhs) and their
/// difference, with the per-term breakdown.
struct ResidualReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    TermAccumulators terms;
    std::size_t steps = 0;
    std::size_t events = 0;
    std::uint64_t seed = 0;
};

/// Continuous-part increments of step j, evaluated at (t_j, x_j). For
/// centered coefficient sets the drift conversions a - ∫g dΠ and
/// Q - ∫G dΠ are applied inline.
TermAccumulators rhs_step(const ScenarioSpec& spec, const ProcessPath& path,
                          const FieldRealization& fr, std::size_t j);

/// Jump increments of event l: the field jump F(x- + g) - F(x-) at the
/// pre-event field state, and G evaluated at the shifted point x- + g.
TermAccumulators rhs_jump(const ScenarioSpec& spec, const ProcessPath& path,
                          const FieldRealization& fr, std::size_t event);

/// Verifies the chain rule on the given noise. The spec is first brought to
/// the requested representation (converting when needed) and assembled in
/// that form; both forms agree pathwise up to rounding.
ResidualReport verify_on_noise(const ScenarioSpec& spec, const WienerPath& w,
                               const MarkedJumpStream& jumps, Representation mode);

/// Samples noise substreams from the seed, then verify_on_noise. The jump
/// stream depends only on (seed, intensity, horizon), so runs at different
/// step counts share event times.
ResidualReport verify_path(const ScenarioSpec& spec, std::size_t steps, std::uint64_t seed,
                           Representation mode = Representation::NonCentered);

struct ConvergenceRow {
    std::size_t steps = 0;
    double dt = 0.0;
    std::size_t paths = 0;
    double rms_residual = 0.0;
    double max_residual = 0.0;
    double order = 0.0;  // vs the previous level; NaN on the first row
    bool exact = false;  // rms below the machine-exactness floor
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
};

/// RMS floor under which a level is reported as machine-exact.
inline constexpr double kExactnessFloor = 1e-12;

/// Residual statistics across nested levels. Noise is sampled once per path
/// at the coarsest level and bridge-refined upward, so every level sees the
/// same trajectory; levels must be powers-of-two multiples of each other.
ConvergenceTable convergence_study(const ScenarioSpec& spec,
                                   std::span<const std::size_t> levels,
                                   std::size_t paths, std::uint64_t seed,
                                   Representation mode = Representation::NonCentered,
                                   unsigned threads = 1);

/// Independent per-path residual reports for seeds seed, seed+1, ...
/// Reduction order is fixed by the path index, so the result does not
/// depend on the thread count.
std::vector<ResidualReport> verify_many(const ScenarioSpec& spec, std::size_t steps,
                                        std::size_t paths, std::uint64_t seed,
                                        Representation mode = Representation::NonCentered,
                                        unsigned threads = 1);

}  // namespace itw
