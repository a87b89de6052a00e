#pragma once

#include <cstddef>
#include <span>
#include <unordered_map>
#include <vector>

#include "itw/noise.hpp"
#include "itw/scenario.hpp"
#include "itw/types.hpp"

namespace itw {

/// Pointwise realization of the random field on the shared noise. The field
/// has no dynamics in x, so F(t_j, x) is an accumulated sum over steps i < j
/// plus the jump contributions up to t_j, evaluated lazily at any query
/// point; no spatial mesh is involved.
///
/// Evaluation methods are logically const but maintain a memo cache and
/// scratch buffers, so a realization must stay confined to one thread.
class FieldRealization {
public:
    FieldRealization(FieldCoefficients fc, const WienerPath& w,
                     const MarkedJumpStream& jumps, const IntensitySpec& intensity,
                     bool memoize = true);

    /// F(t_j, x). Centered coefficient sets subtract dt * ∫G dΠ each step.
    double value(std::size_t j, std::span<const double> x) const;

    /// Space gradient of F(t_j, .) at x: exact term-wise differentiation when
    /// the coefficients carry analytic gradients, otherwise central
    /// differences of value().
    void gradient(std::size_t j, std::span<const double> x, std::span<double> out) const;

    /// Space Hessian, symmetric by construction; analytic when second
    /// derivatives are supplied, otherwise central differences.
    void hessian(std::size_t j, std::span<const double> x, std::span<double> out) const;

    /// F immediately before event l: the continuous part through the start of
    /// the enclosing step, plus the jumps of strictly earlier events.
    double value_pre_event(std::size_t event, std::span<const double> x) const;

    const TimeGrid& grid() const { return grid_; }
    const FieldCoefficients& coefficients() const { return fc_; }
    const WienerPath& wiener() const { return *w_; }
    const MarkedJumpStream& jumps() const { return *jumps_; }
    std::size_t n() const { return fc_.n; }
    std::size_t m() const { return fc_.m; }

private:
    struct MemoKey {
        std::size_t step = 0;
        Vec x;
        bool operator==(const MemoKey&) const = default;
    };
    struct MemoHash {
        std::size_t operator()(const MemoKey& k) const;
    };

    double accumulate_value(std::size_t upto_step, std::size_t event_count,
                            std::span<const double> x) const;

    FieldCoefficients fc_;
    const WienerPath* w_ = nullptr;
    const MarkedJumpStream* jumps_ = nullptr;
    IntensitySpec intensity_;
    TimeGrid grid_;
    bool centered_ = false;
    bool memoize_ = true;

    std::vector<std::size_t> events_by_node_;  // #events with time <= t_j
    mutable std::unordered_map<MemoKey, double, MemoHash> memo_;
    mutable Vec d_buf_, gd_buf_, hd_buf_, gq_buf_, hq_buf_, gg_buf_, hg_buf_;
};

/// Central-difference steps used for field and coefficient derivatives.
double fd_step_gradient(std::span<const double> x);
double fd_step_hessian(std::span<const double> x);

/// Space gradient of the field's diffusion coefficient, (i,k) at i*m+k:
/// analytic when supplied, otherwise central differences of D.
void coefficient_grad_diffusion(const FieldCoefficients& fc, double t,
                                std::span<const double> x, std::span<double> out);

}  // namespace itw
