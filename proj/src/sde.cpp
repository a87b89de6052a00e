#include "itw/sde.hpp"

#include <algorithm>
#include <cmath>

namespace itw {

ProcessPath integrate_process(const ProcessCoefficients& pc, const WienerPath& w,
                              const MarkedJumpStream& jumps, const Vec& z,
                              const IntensitySpec& intensity) {
    const std::size_t n = pc.n;
    if (z.size() != n) throw std::invalid_argument("initial state dimension mismatch");
    if (w.dim != pc.m) throw std::invalid_argument("Wiener dimension mismatch");
    if (jumps.horizon != w.grid.horizon)
        throw std::invalid_argument("jump stream horizon differs from grid horizon");

    const TimeGrid& grid = w.grid;
    const double dt = grid.dt();
    const std::size_t steps = grid.steps;
    const bool centered = pc.representation == Representation::Centered;

    ProcessPath path;
    path.grid = grid;
    path.n = n;
    path.states.resize((steps + 1) * n);
    path.ledger.reserve(jumps.size());
    std::copy(z.begin(), z.end(), path.states.begin());

    Vec x(z);
    Vec a(n), b(n * pc.m), g(n), inc(n), comp(n);
    std::size_t next_event = 0;

    for (std::size_t j = 0; j < steps; ++j) {
        const double t = grid.node(j);
        pc.drift(t, a);
        pc.diffusion(t, b);

        // Full-step increment; jumps inside the step split it by time fraction.
        for (std::size_t i = 0; i < n; ++i) {
            double diff = 0.0;
            for (std::size_t k = 0; k < pc.m; ++k) diff += b[i * pc.m + k] * w.increment(j, k);
            inc[i] = a[i] * dt + diff;
        }
        if (centered) {
            std::fill(comp.begin(), comp.end(), 0.0);
            intensity.marks.for_each_atom([&](double mark, double weight) {
                pc.jump(t, mark, g);
                for (std::size_t i = 0; i < n; ++i) comp[i] += weight * g[i];
            });
            for (std::size_t i = 0; i < n; ++i) inc[i] -= intensity.rate * comp[i] * dt;
        }

        const double t_next = grid.node(j + 1);
        double frac_applied = 0.0;
        while (next_event < jumps.size() && jumps.events[next_event].time <= t_next) {
            const JumpEvent& ev = jumps.events[next_event];
            const double theta = std::clamp((ev.time - t) / dt, 0.0, 1.0);
            for (std::size_t i = 0; i < n; ++i) x[i] += (theta - frac_applied) * inc[i];
            frac_applied = theta;

            JumpRecord rec;
            rec.event = next_event;
            rec.step = j;
            rec.time = ev.time;
            rec.mark = ev.mark;
            rec.theta = theta;
            rec.pre = x;
            pc.jump(ev.time, ev.mark, g);
            for (std::size_t i = 0; i < n; ++i) x[i] += g[i];
            rec.post = x;
            path.ledger.push_back(std::move(rec));
            ++next_event;
        }
        for (std::size_t i = 0; i < n; ++i) x[i] += (1.0 - frac_applied) * inc[i];

        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(x[i]))
                throw DivergenceError(j, "state diverged at step " + std::to_string(j) +
                                             " (component " + std::to_string(i) + ")");
        }
        std::copy(x.begin(), x.end(), path.states.begin() + (j + 1) * n);
    }
    return path;
}

}  // namespace itw
