#include "itw/wentzell.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace itw {

TermAccumulators& TermAccumulators::operator+=(const TermAccumulators& o) {
    drift_q += o.drift_q;
    drift_transport += o.drift_transport;
    drift_diffusion += o.drift_diffusion;
    drift_cross += o.drift_cross;
    diffusion_d += o.diffusion_d;
    diffusion_transport += o.diffusion_transport;
    jump_field += o.jump_field;
    jump_g += o.jump_g;
    return *this;
}

namespace {

[[noreturn]] void throw_nonfinite(const char* name, double t, std::span<const double> x) {
    throw ContractViolation(name, t, Vec(x.begin(), x.end()));
}

}  // namespace

TermAccumulators rhs_step(const ScenarioSpec& spec, const ProcessPath& path,
                          const FieldRealization& fr, std::size_t j) {
    const TimeGrid& grid = path.grid;
    if (j >= grid.steps) throw std::invalid_argument("step index beyond grid");

    const std::size_t n = spec.n, m = spec.m;
    const double dt = grid.dt();
    const double t = grid.node(j);
    const std::span<const double> x = path.state(j);
    const bool centered = spec.representation() == Representation::Centered;
    const FieldCoefficients& fc = spec.field;
    const ProcessCoefficients& pc = spec.process;
    const WienerPath& w = fr.wiener();

    TermAccumulators inc;

    // Q dt. In the centered form the field drift converts to Q - ∫G dΠ; the
    // Π-integrals of the jump terms cancel against the compensators of the
    // centered event integrals at this same (t_j, x_j) and are not assembled.
    double q = fc.drift(t, x);
    if (!std::isfinite(q)) throw_nonfinite("Q", t, x);
    if (centered) {
        double comp = 0.0;
        spec.intensity.marks.for_each_atom([&](double mark, double weight) {
            const double gv = fc.jump(t, x, mark);
            if (!std::isfinite(gv)) throw_nonfinite("G", t, x);
            comp += weight * gv;
        });
        q -= spec.intensity.rate * comp;
    }
    inc.drift_q = q * dt;

    // D_k dW_k
    Vec d(m);
    fc.diffusion(t, x, d);
    double dsum = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        if (!std::isfinite(d[k])) throw_nonfinite("D", t, x);
        dsum += d[k] * w.increment(j, k);
    }
    inc.diffusion_d = dsum;

    // Field derivatives at (j, x_j)
    Vec grad(n), hess(n * n);
    fr.gradient(j, x, grad);
    fr.hessian(j, x, hess);

    // a . grad F dt, with the centered drift conversion a - ∫g dΠ inline
    Vec a(n);
    pc.drift(t, a);
    if (centered) {
        Vec comp(n, 0.0), g(n);
        spec.intensity.marks.for_each_atom([&](double mark, double weight) {
            pc.jump(t, mark, g);
            for (std::size_t i = 0; i < n; ++i) comp[i] += weight * g[i];
        });
        for (std::size_t i = 0; i < n; ++i) a[i] -= spec.intensity.rate * comp[i];
    }
    double transport = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(a[i])) throw_nonfinite("a", t, x);
        transport += a[i] * grad[i];
    }
    inc.drift_transport = transport * dt;

    Vec b(n * m);
    pc.diffusion(t, b);
    for (std::size_t i = 0; i < n * m; ++i)
        if (!std::isfinite(b[i])) throw_nonfinite("b", t, x);

    // b_k . grad F dW_k
    double diff_transport = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        double bk_grad = 0.0;
        for (std::size_t i = 0; i < n; ++i) bk_grad += b[i * m + k] * grad[i];
        diff_transport += bk_grad * w.increment(j, k);
    }
    inc.diffusion_transport = diff_transport;

    // 1/2 b_k . hess F . b_k dt
    double quad = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            const double bik = b[i * m + k];
            if (bik == 0.0) continue;
            for (std::size_t l = 0; l < n; ++l) quad += bik * hess[i * n + l] * b[l * m + k];
        }
    }
    inc.drift_diffusion = 0.5 * quad * dt;

    // b_k . grad D_k dt — the cross-variation of the field's diffusion
    // coefficient with the process diffusion; appears once.
    Vec grad_d(n * m);
    coefficient_grad_diffusion(fc, t, x, grad_d);
    double cross = 0.0;
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t i = 0; i < n; ++i) cross += b[i * m + k] * grad_d[i * m + k];
    inc.drift_cross = cross * dt;

    return inc;
}

TermAccumulators rhs_jump(const ScenarioSpec& spec, const ProcessPath& path,
                          const FieldRealization& fr, std::size_t event) {
    if (event >= path.ledger.size()) throw std::invalid_argument("event index beyond ledger");
    const JumpRecord& rec = path.ledger[event];

    const std::size_t n = spec.n;
    Vec g(n);
    spec.process.jump(rec.time, rec.mark, g);
    Vec shifted(rec.pre);
    for (std::size_t i = 0; i < n; ++i) shifted[i] += g[i];

    TermAccumulators inc;
    inc.jump_field = fr.value_pre_event(event, shifted) - fr.value_pre_event(event, rec.pre);
    const double gv = spec.field.jump(rec.time, shifted, rec.mark);
    if (!std::isfinite(gv)) throw_nonfinite("G", rec.time, shifted);
    inc.jump_g = gv;
    return inc;
}

ResidualReport verify_on_noise(const ScenarioSpec& spec, const WienerPath& w,
                               const MarkedJumpStream& jumps, Representation mode) {
    if (w.grid.horizon != spec.horizon)
        throw std::invalid_argument("Wiener grid horizon differs from scenario horizon");
    if (jumps.horizon != spec.horizon)
        throw std::invalid_argument("jump stream horizon differs from scenario horizon");

    const ScenarioSpec* working = &spec;
    ScenarioSpec converted;
    if (spec.representation() != mode) {
        converted = (mode == Representation::NonCentered) ? to_noncentered(spec).spec
                                                          : to_centered(spec).spec;
        working = &converted;
    }

    const ProcessPath path =
        integrate_process(working->process, w, jumps, working->initial_state, working->intensity);
    const FieldRealization fr(working->field, w, jumps, working->intensity);

    TermAccumulators terms;
    double rhs = 0.0;
    for (std::size_t j = 0; j < w.grid.steps; ++j) {
        const TermAccumulators inc = rhs_step(*working, path, fr, j);
        terms += inc;
        rhs += inc.sum();
    }
    for (std::size_t l = 0; l < path.ledger.size(); ++l) {
        const TermAccumulators inc = rhs_jump(*working, path, fr, l);
        terms += inc;
        rhs += inc.sum();
    }

    const double f0 = working->field.initial(working->initial_state);
    if (!std::isfinite(f0)) throw_nonfinite("F0", 0.0, working->initial_state);
    const double lhs = fr.value(w.grid.steps, path.state(w.grid.steps)) - f0;

    ResidualReport report;
    report.lhs = lhs;
    report.rhs = rhs;
    report.residual = lhs - rhs;
    report.terms = terms;
    report.steps = w.grid.steps;
    report.events = path.ledger.size();
    return report;
}

ResidualReport verify_path(const ScenarioSpec& spec, std::size_t steps, std::uint64_t seed,
                           Representation mode) {
    const TimeGrid grid(spec.horizon, steps);
    const WienerPath w = sample_wiener(grid, spec.m, substream(seed, 1));
    const MarkedJumpStream jumps = sample_jumps(spec.intensity, spec.horizon, substream(seed, 2));
    ResidualReport report = verify_on_noise(spec, w, jumps, mode);
    report.seed = seed;
    return report;
}

namespace {

/// Runs fn(p) for p in [0, count) over the given number of threads; worker
/// results land in caller-owned slots indexed by p, so reduction order never
/// depends on scheduling.
template <class Fn>
void parallel_for_index(std::size_t count, unsigned threads, Fn&& fn) {
    threads = std::max(1u, threads);
    if (threads == 1 || count <= 1) {
        for (std::size_t p = 0; p < count; ++p) fn(p);
        return;
    }
    const unsigned workers = static_cast<unsigned>(
        std::min<std::size_t>(threads, count));
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned wdx = 0; wdx < workers; ++wdx) {
        pool.emplace_back([&, wdx]() {
            try {
                for (std::size_t p = wdx; p < count; p += workers) fn(p);
            } catch (...) {
                errors[wdx] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
}

}  // namespace

std::vector<ResidualReport> verify_many(const ScenarioSpec& spec, std::size_t steps,
                                        std::size_t paths, std::uint64_t seed,
                                        Representation mode, unsigned threads) {
    if (paths == 0) throw std::invalid_argument("need at least one path");
    std::vector<ResidualReport> reports(paths);
    parallel_for_index(paths, threads, [&](std::size_t p) {
        reports[p] = verify_path(spec, steps, seed + p, mode);
    });
    return reports;
}

ConvergenceTable convergence_study(const ScenarioSpec& spec, std::span<const std::size_t> levels,
                                   std::size_t paths, std::uint64_t seed, Representation mode,
                                   unsigned threads) {
    if (levels.empty()) throw std::invalid_argument("need at least one level");
    for (std::size_t r = 1; r < levels.size(); ++r) {
        if (levels[r] <= levels[r - 1] || levels[r] % levels[r - 1] != 0)
            throw std::invalid_argument("levels must be increasing multiples");
        const std::size_t ratio = levels[r] / levels[r - 1];
        if ((ratio & (ratio - 1)) != 0)
            throw std::invalid_argument("level ratios must be powers of two");
    }
    if (paths < 30) throw std::invalid_argument("convergence study needs at least 30 paths");

    std::vector<std::vector<double>> residuals(levels.size(), std::vector<double>(paths, 0.0));

    parallel_for_index(paths, threads, [&](std::size_t p) {
        const std::uint64_t path_seed = seed + p;
        WienerPath w = sample_wiener(TimeGrid(spec.horizon, levels[0]), spec.m,
                                     substream(path_seed, 1));
        const MarkedJumpStream jumps =
            sample_jumps(spec.intensity, spec.horizon, substream(path_seed, 2));
        for (std::size_t r = 0; r < levels.size(); ++r) {
            if (r > 0) w = refine(w, levels[r] / levels[r - 1], substream(path_seed, 16 + r));
            residuals[r][p] = verify_on_noise(spec, w, jumps, mode).residual;
        }
    });

    ConvergenceTable table;
    table.rows.resize(levels.size());
    for (std::size_t r = 0; r < levels.size(); ++r) {
        ConvergenceRow& row = table.rows[r];
        row.steps = levels[r];
        row.dt = spec.horizon / static_cast<double>(levels[r]);
        row.paths = paths;
        double sq = 0.0, mx = 0.0;
        for (const double res : residuals[r]) {
            sq += res * res;
            mx = std::max(mx, std::abs(res));
        }
        row.rms_residual = std::sqrt(sq / static_cast<double>(paths));
        row.max_residual = mx;
        row.exact = row.rms_residual < kExactnessFloor;
        if (r == 0) {
            row.order = std::numeric_limits<double>::quiet_NaN();
        } else {
            const double ratio = std::log2(static_cast<double>(levels[r] / levels[r - 1]));
            const double prev = table.rows[r - 1].rms_residual;
            row.order = (row.rms_residual > 0.0 && prev > 0.0)
                            ? std::log2(prev / row.rms_residual) / ratio
                            : std::numeric_limits<double>::quiet_NaN();
        }
    }
    return table;
}

}  // namespace itw
