#pragma once

// Closed-form discrete residual oracles, derived by regrouping the telescoped
// field increment by hand. They read only the raw noise and the scenario
// constants, never the sde/field/wentzell assembly they are checked against.

#include <algorithm>
#include <cmath>

#include "itw/noise.hpp"

namespace itw::oracles {

/// Residual of the static-quadratic-field scenario (F(x) = x^2, Q = D = G = 0,
/// constant a and b, unit jump amplitude):
///   sum_j [(a dt + b dW_j)^2 - b^2 dt] + sum_l 2 (1 - theta_l) u_{j(l)} mark_l
/// where u_j is the full-step drift+diffusion increment and theta_l the
/// sub-step fraction of the event.
inline double ito_quadratic_residual(const WienerPath& w, const MarkedJumpStream& jumps,
                                     double a, double b) {
    const double dt = w.grid.dt();
    double acc = 0.0;
    for (std::size_t j = 0; j < w.grid.steps; ++j) {
        const double u = a * dt + b * w.increment(j, 0);
        acc += u * u - b * b * dt;
    }
    for (const auto& ev : jumps.events) {
        const std::size_t j = w.grid.step_containing(ev.time);
        const double u = a * dt + b * w.increment(j, 0);
        const double theta = std::clamp((ev.time - w.grid.node(j)) / dt, 0.0, 1.0);
        acc += 2.0 * (1.0 - theta) * u * ev.mark;
    }
    return acc;
}

/// Residual of the product-rule scenario (F(t,x) = phi(t) x, dphi = alpha dt
/// + beta dw, process a dt + b dw + unit-amplitude jumps):
///   sum_j [u_j v_j - b beta dt] + sum_l v_{j(l)} mark_l
/// with u_j = a dt + b dW_j and v_j = alpha dt + beta dW_j. The leading term
/// is the cross-variation defect beta b (dW_j^2 - dt), RMS |beta b| sqrt(2 T dt).
inline double product_rule_residual(const WienerPath& w, const MarkedJumpStream& jumps,
                                    double alpha, double beta, double a, double b) {
    const double dt = w.grid.dt();
    double acc = 0.0;
    for (std::size_t j = 0; j < w.grid.steps; ++j) {
        const double u = a * dt + b * w.increment(j, 0);
        const double v = alpha * dt + beta * w.increment(j, 0);
        acc += u * v - b * beta * dt;
    }
    for (const auto& ev : jumps.events) {
        const std::size_t j = w.grid.step_containing(ev.time);
        acc += (alpha * dt + beta * w.increment(j, 0)) * ev.mark;
    }
    return acc;
}

/// RMS of the leading cross-variation term of the product-rule residual.
inline double product_rule_rms_leading(double beta, double b, double horizon, double dt) {
    return std::abs(beta * b) * std::sqrt(2.0 * horizon * dt);
}

}  // namespace itw::oracles
