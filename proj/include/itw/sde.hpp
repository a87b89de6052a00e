#pragma once

#include <span>
#include <vector>

#include "itw/noise.hpp"
#include "itw/scenario.hpp"
#include "itw/types.hpp"

namespace itw {

/// One applied jump: the enclosing step, the exact time, and the state on
/// both sides of the event.
struct JumpRecord {
    std::size_t event = 0;  // index into the stream
    std::size_t step = 0;   // j with tau in (t_j, t_{j+1}]
    double time = 0.0;
    double mark = 0.0;
    double theta = 0.0;     // (tau - t_j) / dt
    Vec pre;
    Vec post;
};

/// Euler path of the state process with a per-event ledger.
struct ProcessPath {
    TimeGrid grid;
    std::size_t n = 1;
    std::vector<double> states;  // (N+1) x n, row-major
    std::vector<JumpRecord> ledger;

    std::span<const double> state(std::size_t j) const {
        return {states.data() + j * n, n};
    }
};

/// Left-point Euler integration on the grid of w, with jumps applied at
/// exact event times inside the enclosing step: drift and diffusion are
/// advanced by the sub-interval fraction, the jump amplitude g is added,
/// and the remainder of the step follows. Centered coefficient sets
/// additionally subtract the compensator dt * ∫g dΠ each step.
///
/// Throws DivergenceError (with the step index) on a non-finite state.
ProcessPath integrate_process(const ProcessCoefficients& pc, const WienerPath& w,
                              const MarkedJumpStream& jumps, const Vec& z,
                              const IntensitySpec& intensity);

}  // namespace itw
