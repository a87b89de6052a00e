#include "itw/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace itw {

namespace {

[[noreturn]] void throw_nonfinite(const char* name, double t, std::span<const double> x) {
    throw ContractViolation(name, t, Vec(x.begin(), x.end()));
}

double fd_scale(std::span<const double> x) {
    double s = 0.0;
    for (const double xi : x) s = std::max(s, std::abs(xi));
    return s;
}

}  // namespace

double fd_step_gradient(std::span<const double> x) {
    return std::max(1e-5, 1e-7 * fd_scale(x));
}

double fd_step_hessian(std::span<const double> x) {
    return std::max(1e-4, 1e-6 * fd_scale(x));
}

std::size_t FieldRealization::MemoHash::operator()(const MemoKey& k) const {
    // FNV-1a over the step index and the raw bits of the coordinates.
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (v >> (8 * byte)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    mix(static_cast<std::uint64_t>(k.step));
    for (const double xi : k.x) mix(std::bit_cast<std::uint64_t>(xi));
    return static_cast<std::size_t>(h);
}

FieldRealization::FieldRealization(FieldCoefficients fc, const WienerPath& w,
                                   const MarkedJumpStream& jumps, const IntensitySpec& intensity,
                                   bool memoize)
    : fc_(std::move(fc)),
      w_(&w),
      jumps_(&jumps),
      intensity_(intensity),
      grid_(w.grid),
      centered_(fc_.representation == Representation::Centered),
      memoize_(memoize) {
    if (fc_.m != w.dim) throw std::invalid_argument("field Wiener dimension mismatch");
    if (jumps.horizon != grid_.horizon)
        throw std::invalid_argument("jump stream horizon differs from grid horizon");

    events_by_node_.resize(grid_.steps + 1, 0);
    std::size_t count = 0;
    for (std::size_t j = 0; j <= grid_.steps; ++j) {
        const double tj = grid_.node(j);
        while (count < jumps.size() && jumps.events[count].time <= tj) ++count;
        events_by_node_[j] = count;
    }

    const std::size_t n = fc_.n, m = fc_.m;
    d_buf_.resize(m);
    gd_buf_.resize(n * m);
    hd_buf_.resize(n * n * m);
    gq_buf_.resize(n);
    hq_buf_.resize(n * n);
    gg_buf_.resize(n);
    hg_buf_.resize(n * n);
}

double FieldRealization::accumulate_value(std::size_t upto_step, std::size_t event_count,
                                          std::span<const double> x) const {
    const double dt = grid_.dt();
    double acc = fc_.initial(x);
    if (!std::isfinite(acc)) throw_nonfinite("F0", 0.0, x);

    for (std::size_t i = 0; i < upto_step; ++i) {
        const double t = grid_.node(i);
        const double q = fc_.drift(t, x);
        if (!std::isfinite(q)) throw_nonfinite("Q", t, x);
        fc_.diffusion(t, x, d_buf_);
        double dsum = 0.0;
        for (std::size_t k = 0; k < fc_.m; ++k) {
            if (!std::isfinite(d_buf_[k])) throw_nonfinite("D", t, x);
            dsum += d_buf_[k] * w_->increment(i, k);
        }
        double inc = q * dt + dsum;
        if (centered_) {
            double comp = 0.0;
            intensity_.marks.for_each_atom([&](double mark, double weight) {
                const double gv = fc_.jump(t, x, mark);
                if (!std::isfinite(gv)) throw_nonfinite("G", t, x);
                comp += weight * gv;
            });
            inc -= intensity_.rate * comp * dt;
        }
        acc += inc;
    }

    for (std::size_t p = 0; p < event_count; ++p) {
        const JumpEvent& ev = jumps_->events[p];
        const double gv = fc_.jump(ev.time, x, ev.mark);
        if (!std::isfinite(gv)) throw_nonfinite("G", ev.time, x);
        acc += gv;
    }
    return acc;
}

double FieldRealization::value(std::size_t j, std::span<const double> x) const {
    if (j > grid_.steps) throw std::invalid_argument("step index beyond grid");
    if (memoize_) {
        MemoKey key{j, Vec(x.begin(), x.end())};
        const auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        const double v = accumulate_value(j, events_by_node_[j], x);
        memo_.emplace(std::move(key), v);
        return v;
    }
    return accumulate_value(j, events_by_node_[j], x);
}

double FieldRealization::value_pre_event(std::size_t event, std::span<const double> x) const {
    if (event >= jumps_->size()) throw std::invalid_argument("event index beyond stream");
    const std::size_t j = grid_.step_containing(jumps_->events[event].time);
    return accumulate_value(j, event, x);
}

void FieldRealization::gradient(std::size_t j, std::span<const double> x,
                                std::span<double> out) const {
    const std::size_t n = fc_.n, m = fc_.m;
    if (fc_.has_analytic_gradients()) {
        const double dt = grid_.dt();
        fc_.grad_initial(x, out);
        for (std::size_t i = 0; i < j; ++i) {
            const double t = grid_.node(i);
            fc_.grad_drift(t, x, gq_buf_);
            fc_.grad_diffusion(t, x, gd_buf_);
            for (std::size_t a = 0; a < n; ++a) {
                double inc = gq_buf_[a] * dt;
                for (std::size_t k = 0; k < m; ++k)
                    inc += gd_buf_[a * m + k] * w_->increment(i, k);
                out[a] += inc;
            }
            if (centered_) {
                intensity_.marks.for_each_atom([&](double mark, double weight) {
                    fc_.grad_jump(t, x, mark, gg_buf_);
                    const double scale = intensity_.rate * weight * dt;
                    for (std::size_t a = 0; a < n; ++a) out[a] -= scale * gg_buf_[a];
                });
            }
        }
        for (std::size_t p = 0; p < events_by_node_[j]; ++p) {
            const JumpEvent& ev = jumps_->events[p];
            fc_.grad_jump(ev.time, x, ev.mark, gg_buf_);
            for (std::size_t a = 0; a < n; ++a) out[a] += gg_buf_[a];
        }
        for (std::size_t a = 0; a < n; ++a)
            if (!std::isfinite(out[a])) throw_nonfinite("grad F", grid_.node(j), x);
        return;
    }

    const double h = fd_step_gradient(x);
    Vec xb(x.begin(), x.end());
    for (std::size_t a = 0; a < n; ++a) {
        const double xa = xb[a];
        xb[a] = xa + h;
        const double up = value(j, xb);
        xb[a] = xa - h;
        const double dn = value(j, xb);
        xb[a] = xa;
        out[a] = (up - dn) / (2.0 * h);
    }
}

void FieldRealization::hessian(std::size_t j, std::span<const double> x,
                               std::span<double> out) const {
    const std::size_t n = fc_.n, m = fc_.m;
    if (fc_.has_analytic_hessians()) {
        const double dt = grid_.dt();
        fc_.hess_initial(x, out);
        for (std::size_t i = 0; i < j; ++i) {
            const double t = grid_.node(i);
            fc_.hess_drift(t, x, hq_buf_);
            fc_.hess_diffusion(t, x, hd_buf_);
            for (std::size_t a = 0; a < n * n; ++a) {
                double inc = hq_buf_[a] * dt;
                for (std::size_t k = 0; k < m; ++k)
                    inc += hd_buf_[a * m + k] * w_->increment(i, k);
                out[a] += inc;
            }
            if (centered_) {
                intensity_.marks.for_each_atom([&](double mark, double weight) {
                    fc_.hess_jump(t, x, mark, hg_buf_);
                    const double scale = intensity_.rate * weight * dt;
                    for (std::size_t a = 0; a < n * n; ++a) out[a] -= scale * hg_buf_[a];
                });
            }
        }
        for (std::size_t p = 0; p < events_by_node_[j]; ++p) {
            const JumpEvent& ev = jumps_->events[p];
            fc_.hess_jump(ev.time, x, ev.mark, hg_buf_);
            for (std::size_t a = 0; a < n * n; ++a) out[a] += hg_buf_[a];
        }
        for (std::size_t a = 0; a < n * n; ++a)
            if (!std::isfinite(out[a])) throw_nonfinite("hess F", grid_.node(j), x);
        return;
    }

    const double h = fd_step_hessian(x);
    Vec xb(x.begin(), x.end());
    const double center = value(j, xb);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a; b < n; ++b) {
            double v;
            if (a == b) {
                const double xa = xb[a];
                xb[a] = xa + h;
                const double up = value(j, xb);
                xb[a] = xa - h;
                const double dn = value(j, xb);
                xb[a] = xa;
                v = (up - 2.0 * center + dn) / (h * h);
            } else {
                const double xa = xb[a], xv = xb[b];
                xb[a] = xa + h; xb[b] = xv + h;
                const double pp = value(j, xb);
                xb[b] = xv - h;
                const double pm = value(j, xb);
                xb[a] = xa - h; xb[b] = xv + h;
                const double mp = value(j, xb);
                xb[b] = xv - h;
                const double mm = value(j, xb);
                xb[a] = xa; xb[b] = xv;
                v = (pp - pm - mp + mm) / (4.0 * h * h);
            }
            out[a * n + b] = v;
            out[b * n + a] = v;
        }
    }
}

void coefficient_grad_diffusion(const FieldCoefficients& fc, double t, std::span<const double> x,
                                std::span<double> out) {
    const std::size_t n = fc.n, m = fc.m;
    if (fc.grad_diffusion) {
        fc.grad_diffusion(t, x, out);
        return;
    }
    const double h = fd_step_gradient(x);
    Vec xb(x.begin(), x.end());
    Vec up(m), dn(m);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = xb[i];
        xb[i] = xi + h;
        fc.diffusion(t, xb, up);
        xb[i] = xi - h;
        fc.diffusion(t, xb, dn);
        xb[i] = xi;
        for (std::size_t k = 0; k < m; ++k) {
            if (!std::isfinite(up[k]) || !std::isfinite(dn[k])) throw_nonfinite("D", t, x);
            out[i * m + k] = (up[k] - dn[k]) / (2.0 * h);
        }
    }
}

}  // namespace itw
