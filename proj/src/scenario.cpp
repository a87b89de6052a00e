#include "itw/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "itw/field.hpp"

namespace itw {

Representation ScenarioSpec::representation() const {
    if (process.representation != field.representation)
        throw std::logic_error("scenario '" + name +
                               "': process and field representations disagree");
    return process.representation;
}

namespace {

struct EntryDef {
    CatalogInfo info;
    ScenarioSpec (*build)(const ParamMap&);
};

double at(const ParamMap& p, const char* key) { return p.at(key); }

// --- affine-exact: F(t,x) = c.x + psi t over a constant-coefficient process
// with jumps. Every chain-rule term telescopes, so the residual is machine
// precision at any step count.
ScenarioSpec build_affine_exact(const ParamMap& p) {
    const double c = at(p, "c"), psi = at(p, "psi");
    const double a = at(p, "a"), b = at(p, "b"), lambda = at(p, "lambda");

    ScenarioSpec s;
    s.name = "affine-exact";
    s.n = s.m = 1;
    s.process.n = s.process.m = 1;
    s.process.drift = [a](double, std::span<double> out) { out[0] = a; };
    s.process.diffusion = [b](double, std::span<double> out) { out[0] = b; };
    s.process.jump = [](double, double mark, std::span<double> out) { out[0] = mark; };

    s.field.n = s.field.m = 1;
    s.field.drift = [psi](double, std::span<const double>) { return psi; };
    s.field.diffusion = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.jump = [](double, std::span<const double>, double) { return 0.0; };
    s.field.initial = [c](std::span<const double> x) { return c * x[0]; };
    s.field.grad_drift = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.grad_diffusion = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.grad_jump = [](double, std::span<const double>, double, std::span<double> out) { out[0] = 0.0; };
    s.field.grad_initial = [c](std::span<const double>, std::span<double> out) { out[0] = c; };
    s.field.hess_drift = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.hess_diffusion = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.hess_jump = [](double, std::span<const double>, double, std::span<double> out) { out[0] = 0.0; };
    s.field.hess_initial = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };

    s.intensity = IntensitySpec(lambda, MarkDistribution::point(0.7));
    s.initial_state = {0.0};
    s.horizon = 1.0;
    s.exactness_tol = 1e-12;
    return s;
}

// --- ito-quadratic: static F(x) = x^2, Q = D = G = 0. The chain rule
// collapses to the jump-aware Ito formula; the discrete residual has the
// closed form sum_j b^2 (dW_j^2 - dt) plus drift and jump cross terms.
ScenarioSpec build_ito_quadratic(const ParamMap& p) {
    const double a = at(p, "a"), b = at(p, "b"), lambda = at(p, "lambda");

    ScenarioSpec s;
    s.name = "ito-quadratic";
    s.n = s.m = 1;
    s.process.n = s.process.m = 1;
    s.process.drift = [a](double, std::span<double> out) { out[0] = a; };
    s.process.diffusion = [b](double, std::span<double> out) { out[0] = b; };
    s.process.jump = [](double, double mark, std::span<double> out) { out[0] = mark; };

    s.field.n = s.field.m = 1;
    s.field.drift = [](double, std::span<const double>) { return 0.0; };
    s.field.diffusion = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.jump = [](double, std::span<const double>, double) { return 0.0; };
    s.field.initial = [](std::span<const double> x) { return x[0] * x[0]; };
    s.field.grad_drift = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.grad_diffusion = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.grad_jump = [](double, std::span<const double>, double, std::span<double> out) { out[0] = 0.0; };
    s.field.grad_initial = [](std::span<const double> x, std::span<double> out) { out[0] = 2.0 * x[0]; };
    s.field.hess_drift = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.hess_diffusion = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.hess_jump = [](double, std::span<const double>, double, std::span<double> out) { out[0] = 0.0; };
    s.field.hess_initial = [](std::span<const double>, std::span<double> out) { out[0] = 2.0; };

    s.intensity = IntensitySpec(lambda, MarkDistribution::uniform(-0.5, 0.5));
    s.initial_state = {0.0};
    s.horizon = 1.0;
    return s;
}

// --- product-rule: F(t,x) = phi(t) x with dphi = alpha dt + beta dw_1,
// realized through Q = alpha x, D = beta x, F0 = x. The residual is the
// discrete cross-variation defect, RMS ~ |beta b| sqrt(2 T dt).
ScenarioSpec build_product_rule(const ParamMap& p) {
    const double alpha = at(p, "alpha"), beta = at(p, "beta");
    const double a = at(p, "a"), b = at(p, "b"), lambda = at(p, "lambda");

    ScenarioSpec s;
    s.name = "product-rule";
    s.n = s.m = 1;
    s.process.n = s.process.m = 1;
    s.process.drift = [a](double, std::span<double> out) { out[0] = a; };
    s.process.diffusion = [b](double, std::span<double> out) { out[0] = b; };
    s.process.jump = [](double, double mark, std::span<double> out) { out[0] = mark; };

    s.field.n = s.field.m = 1;
    s.field.drift = [alpha](double, std::span<const double> x) { return alpha * x[0]; };
    s.field.diffusion = [beta](double, std::span<const double> x, std::span<double> out) {
        out[0] = beta * x[0];
    };
    s.field.jump = [](double, std::span<const double>, double) { return 0.0; };
    s.field.initial = [](std::span<const double> x) { return x[0]; };
    s.field.grad_drift = [alpha](double, std::span<const double>, std::span<double> out) { out[0] = alpha; };
    s.field.grad_diffusion = [beta](double, std::span<const double>, std::span<double> out) { out[0] = beta; };
    s.field.grad_jump = [](double, std::span<const double>, double, std::span<double> out) { out[0] = 0.0; };
    s.field.grad_initial = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
    s.field.hess_drift = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.hess_diffusion = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.hess_jump = [](double, std::span<const double>, double, std::span<double> out) { out[0] = 0.0; };
    s.field.hess_initial = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };

    s.intensity = IntensitySpec(lambda, MarkDistribution::uniform(-0.5, 0.5));
    s.initial_state = {1.0};
    s.horizon = 1.0;
    return s;
}

// --- jump-only: pure jump dynamics, G independent of x.
ScenarioSpec build_jump_only(const ParamMap& p) {
    const double lambda = at(p, "lambda"), c = at(p, "c");

    ScenarioSpec s;
    s.name = "jump-only";
    s.n = s.m = 1;
    s.process.n = s.process.m = 1;
    s.process.drift = [](double, std::span<double> out) { out[0] = 0.0; };
    s.process.diffusion = [](double, std::span<double> out) { out[0] = 0.0; };
    s.process.jump = [](double, double mark, std::span<double> out) { out[0] = mark; };

    s.field.n = s.field.m = 1;
    s.field.drift = [](double, std::span<const double>) { return 0.0; };
    s.field.diffusion = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.jump = [c](double, std::span<const double>, double mark) { return c * mark; };
    s.field.initial = [](std::span<const double> x) { return x[0]; };
    s.field.grad_drift = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.grad_diffusion = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.grad_jump = [](double, std::span<const double>, double, std::span<double> out) { out[0] = 0.0; };
    s.field.grad_initial = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
    s.field.hess_drift = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.hess_diffusion = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.hess_jump = [](double, std::span<const double>, double, std::span<double> out) { out[0] = 0.0; };
    s.field.hess_initial = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };

    s.intensity = IntensitySpec(lambda, MarkDistribution::uniform(0.5, 1.5));
    s.initial_state = {0.0};
    s.horizon = 1.0;
    s.exactness_tol = 1e-12;
    return s;
}

// --- jump-linear-g: like jump-only but G(t,x,mark) = x mark, so the value of
// G depends on where it is evaluated. Exact only when G is taken at the
// shifted point x- + g; evaluating at x- leaves sum(mark^2) in the residual.
ScenarioSpec build_jump_linear_g(const ParamMap& p) {
    const double lambda = at(p, "lambda");

    ScenarioSpec s;
    s.name = "jump-linear-g";
    s.n = s.m = 1;
    s.process.n = s.process.m = 1;
    s.process.drift = [](double, std::span<double> out) { out[0] = 0.0; };
    s.process.diffusion = [](double, std::span<double> out) { out[0] = 0.0; };
    s.process.jump = [](double, double mark, std::span<double> out) { out[0] = mark; };

    s.field.n = s.field.m = 1;
    s.field.drift = [](double, std::span<const double>) { return 0.0; };
    s.field.diffusion = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.jump = [](double, std::span<const double> x, double mark) { return x[0] * mark; };
    s.field.initial = [](std::span<const double> x) { return x[0]; };
    s.field.grad_drift = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.grad_diffusion = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.grad_jump = [](double, std::span<const double>, double mark, std::span<double> out) { out[0] = mark; };
    s.field.grad_initial = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
    s.field.hess_drift = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.hess_diffusion = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.hess_jump = [](double, std::span<const double>, double, std::span<double> out) { out[0] = 0.0; };
    s.field.hess_initial = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };

    s.intensity = IntensitySpec(lambda, MarkDistribution::uniform(0.5, 1.5));
    s.initial_state = {1.0};
    s.horizon = 1.0;
    s.exactness_tol = 1e-12;
    return s;
}

// --- full-mix: every term active, two Wiener components, discrete marks,
// curvature in F0 and in the second diffusion component.
ScenarioSpec build_full_mix(const ParamMap& p) {
    const double a = at(p, "a"), b = at(p, "b"), q = at(p, "q"), d = at(p, "d");
    const double gf = at(p, "gf"), gs = at(p, "gs"), lambda = at(p, "lambda");

    ScenarioSpec s;
    s.name = "full-mix";
    s.n = 1;
    s.m = 2;
    s.process.n = 1;
    s.process.m = 2;
    s.process.drift = [a](double t, std::span<double> out) { out[0] = a * (1.0 + 0.25 * std::sin(t)); };
    s.process.diffusion = [b](double t, std::span<double> out) {
        out[0] = b;
        out[1] = 0.5 * b * std::cos(t);
    };
    s.process.jump = [gs](double t, double mark, std::span<double> out) {
        out[0] = gs * mark * (1.0 + 0.5 * t);
    };

    s.field.n = 1;
    s.field.m = 2;
    s.field.drift = [q](double t, std::span<const double> x) {
        return q * x[0] * (1.0 + 0.2 * std::cos(t));
    };
    s.field.diffusion = [d](double, std::span<const double> x, std::span<double> out) {
        out[0] = d * x[0];
        out[1] = 0.5 * d * std::sin(x[0]);
    };
    s.field.jump = [gf](double, std::span<const double> x, double mark) {
        return gf * mark * (1.0 + 0.3 * x[0]);
    };
    s.field.initial = [](std::span<const double> x) { return x[0] * x[0]; };

    s.field.grad_drift = [q](double t, std::span<const double>, std::span<double> out) {
        out[0] = q * (1.0 + 0.2 * std::cos(t));
    };
    s.field.grad_diffusion = [d](double, std::span<const double> x, std::span<double> out) {
        out[0] = d;
        out[1] = 0.5 * d * std::cos(x[0]);
    };
    s.field.grad_jump = [gf](double, std::span<const double>, double mark, std::span<double> out) {
        out[0] = 0.3 * gf * mark;
    };
    s.field.grad_initial = [](std::span<const double> x, std::span<double> out) { out[0] = 2.0 * x[0]; };
    s.field.hess_drift = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.field.hess_diffusion = [d](double, std::span<const double> x, std::span<double> out) {
        out[0] = 0.0;
        out[1] = -0.5 * d * std::sin(x[0]);
    };
    s.field.hess_jump = [](double, std::span<const double>, double, std::span<double> out) { out[0] = 0.0; };
    s.field.hess_initial = [](std::span<const double>, std::span<double> out) { out[0] = 2.0; };

    s.intensity = IntensitySpec(
        lambda, MarkDistribution::discrete({-0.4, 0.2, 0.7}, {0.3, 0.5, 0.2}));
    s.initial_state = {0.5};
    s.horizon = 1.0;
    return s;
}

const std::map<std::string, EntryDef>& registry() {
    static const std::map<std::string, EntryDef> entries = {
        {"affine-exact",
         {{{"c", "psi"},
           {{"a", 0.5}, {"b", 0.3}, {"lambda", 2.0}},
           1, 1, Representation::NonCentered,
           "F(t,x) = c.x + psi.t; telescoping-exact residual"},
          &build_affine_exact}},
        {"ito-quadratic",
         {{{"a", "b"},
           {{"lambda", 1.0}},
           1, 1, Representation::NonCentered,
           "static F(x) = x^2; chain rule reduces to the Ito formula"},
          &build_ito_quadratic}},
        {"product-rule",
         {{{"alpha", "beta", "a", "b"},
           {{"lambda", 1.0}},
           1, 1, Representation::NonCentered,
           "F(t,x) = phi(t).x with dphi = alpha dt + beta dw"},
          &build_product_rule}},
        {"jump-only",
         {{{"lambda", "c"},
           {},
           1, 1, Representation::NonCentered,
           "pure jump dynamics, G = c.mark"},
          &build_jump_only}},
        {"jump-linear-g",
         {{{"lambda"},
           {},
           1, 1, Representation::NonCentered,
           "pure jump dynamics, G = x.mark (pins the shifted-argument jump term)"},
          &build_jump_linear_g}},
        {"full-mix",
         {{{},
           {{"a", 0.4}, {"b", 0.3}, {"q", 0.5}, {"d", 0.25}, {"gf", 0.6}, {"gs", 0.8}, {"lambda", 1.5}},
           1, 2, Representation::NonCentered,
           "all terms active, two Wiener components, discrete marks"},
          &build_full_mix}},
    };
    return entries;
}

ParamMap complete_params(const std::string& name, const CatalogInfo& info, const ParamMap& params) {
    ParamMap full = params;
    for (const auto& key : info.required) {
        if (!full.count(key))
            throw std::invalid_argument("scenario '" + name + "': missing required parameter '" +
                                        key + "'");
    }
    for (const auto& [key, value] : info.defaults) {
        if (!full.count(key)) full[key] = value;
    }
    for (const auto& [key, value] : full) {
        (void)value;
        const bool known = std::find(info.required.begin(), info.required.end(), key) !=
                               info.required.end() ||
                           info.defaults.count(key);
        if (!known)
            throw std::invalid_argument("scenario '" + name + "': unknown parameter '" + key + "'");
    }
    return full;
}

}  // namespace

ScenarioSpec catalog(const std::string& name, const ParamMap& params) {
    const auto& entries = registry();
    const auto it = entries.find(name);
    if (it == entries.end()) throw std::invalid_argument("unknown scenario '" + name + "'");
    return it->second.build(complete_params(name, it->second.info, params));
}

std::vector<std::string> catalog_names() {
    std::vector<std::string> names;
    for (const auto& [name, entry] : registry()) names.push_back(name);
    return names;
}

CatalogInfo catalog_info(const std::string& name) {
    const auto& entries = registry();
    const auto it = entries.find(name);
    if (it == entries.end()) throw std::invalid_argument("unknown scenario '" + name + "'");
    return it->second.info;
}

// ---------------------------------------------------------------------------
// Representation conversions

namespace {

/// Applies drift += sign * (mark integrals of the jump amplitudes) to both
/// coefficient systems and flips the flags.
ScenarioSpec convert(const ScenarioSpec& spec, Representation target, double sign) {
    ScenarioSpec out = spec;
    const IntensitySpec intensity = spec.intensity;
    const std::size_t n = spec.n;

    const auto g = spec.process.jump;
    const auto a = spec.process.drift;
    out.process.drift = [a, g, intensity, n, sign](double t, std::span<double> dst) {
        a(t, dst);
        Vec comp(n, 0.0);
        intensity.marks.for_each_atom([&](double mark, double weight) {
            Vec buf(n, 0.0);
            g(t, mark, buf);
            for (std::size_t i = 0; i < n; ++i) comp[i] += weight * buf[i];
        });
        for (std::size_t i = 0; i < n; ++i) dst[i] += sign * intensity.rate * comp[i];
    };

    const auto big_g = spec.field.jump;
    const auto q = spec.field.drift;
    out.field.drift = [q, big_g, intensity, sign](double t, std::span<const double> x) {
        double comp = 0.0;
        intensity.marks.for_each_atom(
            [&](double mark, double weight) { comp += weight * big_g(t, x, mark); });
        return q(t, x) + sign * intensity.rate * comp;
    };

    // Derivatives of the converted field drift need the matching derivative
    // of G; without it the converted coefficient set falls back to numeric
    // differentiation.
    if (spec.field.grad_drift && spec.field.grad_jump) {
        const auto gq = spec.field.grad_drift;
        const auto gg = spec.field.grad_jump;
        out.field.grad_drift = [gq, gg, intensity, n, sign](double t, std::span<const double> x,
                                                            std::span<double> dst) {
            gq(t, x, dst);
            Vec comp(n, 0.0);
            intensity.marks.for_each_atom([&](double mark, double weight) {
                Vec buf(n, 0.0);
                gg(t, x, mark, buf);
                for (std::size_t i = 0; i < n; ++i) comp[i] += weight * buf[i];
            });
            for (std::size_t i = 0; i < n; ++i) dst[i] += sign * intensity.rate * comp[i];
        };
    } else {
        out.field.grad_drift = nullptr;
    }
    if (spec.field.hess_drift && spec.field.hess_jump) {
        const auto hq = spec.field.hess_drift;
        const auto hg = spec.field.hess_jump;
        out.field.hess_drift = [hq, hg, intensity, n, sign](double t, std::span<const double> x,
                                                            std::span<double> dst) {
            hq(t, x, dst);
            Vec comp(n * n, 0.0);
            intensity.marks.for_each_atom([&](double mark, double weight) {
                Vec buf(n * n, 0.0);
                hg(t, x, mark, buf);
                for (std::size_t i = 0; i < n * n; ++i) comp[i] += weight * buf[i];
            });
            for (std::size_t i = 0; i < n * n; ++i) dst[i] += sign * intensity.rate * comp[i];
        };
    } else {
        out.field.hess_drift = nullptr;
    }

    out.process.representation = target;
    out.field.representation = target;
    return out;
}

}  // namespace

ConversionResult to_noncentered(const ScenarioSpec& spec) {
    if (spec.representation() == Representation::NonCentered) return {spec, true};
    return {convert(spec, Representation::NonCentered, -1.0), false};
}

ConversionResult to_centered(const ScenarioSpec& spec) {
    if (spec.representation() == Representation::Centered) return {spec, true};
    return {convert(spec, Representation::Centered, +1.0), false};
}

// ---------------------------------------------------------------------------
// Derivative validation

namespace {

constexpr double kDerivativeTol = 1e-5;

struct CheckState {
    double max_abs = 0.0;
    double max_rel = 0.0;

    void update(double analytic, double numeric) {
        const double abs_err = std::abs(analytic - numeric);
        max_abs = std::max(max_abs, abs_err);
        max_rel = std::max(max_rel, abs_err / std::max(1.0, std::abs(analytic)));
    }
};

DerivativeCheck finish(const std::string& name, bool analytic, const CheckState& st) {
    DerivativeCheck c;
    c.coefficient = name;
    c.analytic = analytic;
    c.max_abs_error = st.max_abs;
    c.max_rel_error = st.max_rel;
    c.pass = !analytic || st.max_rel <= kDerivativeTol;
    return c;
}

}  // namespace

DerivativeReport validate_derivatives(const FieldCoefficients& fc, std::span<const Probe> probes,
                                      std::span<const double> marks) {
    if (probes.empty()) throw std::invalid_argument("validate_derivatives needs probes");
    const std::size_t n = fc.n, m = fc.m;

    static const std::vector<double> default_marks = {-1.0, -0.25, 0.5, 1.0};
    std::vector<double> mark_list(marks.begin(), marks.end());
    if (mark_list.empty()) mark_list = default_marks;

    DerivativeReport report;
    Vec an_g(n), an_gd(n * m), hi(m), lo(m), an_h(n * n), an_hd(n * n * m);

    auto scalar_grad = [&](auto&& eval, auto&& analytic, const char* label) {
        CheckState st;
        for (const auto& probe : probes) {
            Vec x = probe.x;
            analytic(probe.t, x, an_g);
            const double h = fd_step_gradient(x);
            for (std::size_t i = 0; i < n; ++i) {
                const double xi = x[i];
                x[i] = xi + h;
                const double up = eval(probe.t, x, label);
                x[i] = xi - h;
                const double dn = eval(probe.t, x, label);
                x[i] = xi;
                st.update(an_g[i], (up - dn) / (2.0 * h));
            }
        }
        return st;
    };
    auto scalar_hess = [&](auto&& eval, auto&& analytic, const char* label) {
        CheckState st;
        for (const auto& probe : probes) {
            Vec x = probe.x;
            analytic(probe.t, x, an_h);
            const double h = fd_step_hessian(x);
            const double center = eval(probe.t, x, label);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i; j < n; ++j) {
                    double num;
                    if (i == j) {
                        const double xi = x[i];
                        x[i] = xi + h;
                        const double up = eval(probe.t, x, label);
                        x[i] = xi - h;
                        const double dn = eval(probe.t, x, label);
                        x[i] = xi;
                        num = (up - 2.0 * center + dn) / (h * h);
                    } else {
                        const double xi = x[i], xj = x[j];
                        x[i] = xi + h; x[j] = xj + h;
                        const double pp = eval(probe.t, x, label);
                        x[j] = xj - h;
                        const double pm = eval(probe.t, x, label);
                        x[i] = xi - h; x[j] = xj + h;
                        const double mp = eval(probe.t, x, label);
                        x[j] = xj - h;
                        const double mm = eval(probe.t, x, label);
                        x[i] = xi; x[j] = xj;
                        num = (pp - pm - mp + mm) / (4.0 * h * h);
                    }
                    st.update(an_h[i * n + j], num);
                    if (i != j) st.update(an_h[j * n + i], num);
                }
            }
        }
        return st;
    };

    // F0
    {
        auto eval = [&](double, const Vec& x, const char* label) {
            const double v = fc.initial(x);
            if (!std::isfinite(v)) throw ContractViolation(label, 0.0, x);
            return v;
        };
        if (fc.grad_initial) {
            auto an = [&](double, const Vec& x, Vec& out) { fc.grad_initial(x, out); };
            report.checks.push_back(finish("F0.grad", true, scalar_grad(eval, an, "F0")));
        } else {
            report.checks.push_back(finish("F0.grad", false, {}));
        }
        if (fc.hess_initial) {
            auto an = [&](double, const Vec& x, Vec& out) { fc.hess_initial(x, out); };
            report.checks.push_back(finish("F0.hess", true, scalar_hess(eval, an, "F0")));
        } else {
            report.checks.push_back(finish("F0.hess", false, {}));
        }
    }

    // Q
    {
        auto eval = [&](double t, const Vec& x, const char* label) {
            const double v = fc.drift(t, x);
            if (!std::isfinite(v)) throw ContractViolation(label, t, x);
            return v;
        };
        if (fc.grad_drift) {
            auto an = [&](double t, const Vec& x, Vec& out) { fc.grad_drift(t, x, out); };
            report.checks.push_back(finish("Q.grad", true, scalar_grad(eval, an, "Q")));
        } else {
            report.checks.push_back(finish("Q.grad", false, {}));
        }
        if (fc.hess_drift) {
            auto an = [&](double t, const Vec& x, Vec& out) { fc.hess_drift(t, x, out); };
            report.checks.push_back(finish("Q.hess", true, scalar_hess(eval, an, "Q")));
        } else {
            report.checks.push_back(finish("Q.hess", false, {}));
        }
    }

    // D, component-wise over k
    if (fc.grad_diffusion) {
        CheckState st;
        for (const auto& probe : probes) {
            Vec x = probe.x;
            fc.grad_diffusion(probe.t, x, an_gd);
            const double h = fd_step_gradient(x);
            for (std::size_t i = 0; i < n; ++i) {
                const double xi = x[i];
                x[i] = xi + h;
                fc.diffusion(probe.t, x, hi);
                x[i] = xi - h;
                fc.diffusion(probe.t, x, lo);
                x[i] = xi;
                for (std::size_t k = 0; k < m; ++k) {
                    if (!std::isfinite(hi[k]) || !std::isfinite(lo[k]))
                        throw ContractViolation("D", probe.t, x);
                    st.update(an_gd[i * m + k], (hi[k] - lo[k]) / (2.0 * h));
                }
            }
        }
        report.checks.push_back(finish("D.grad", true, st));
    } else {
        report.checks.push_back(finish("D.grad", false, {}));
    }
    if (fc.hess_diffusion) {
        CheckState st;
        Vec c0(m), up(m), dn(m);
        for (const auto& probe : probes) {
            Vec x = probe.x;
            fc.hess_diffusion(probe.t, x, an_hd);
            const double h = fd_step_hessian(x);
            fc.diffusion(probe.t, x, c0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i; j < n; ++j) {
                    if (i == j) {
                        const double xi = x[i];
                        x[i] = xi + h;
                        fc.diffusion(probe.t, x, up);
                        x[i] = xi - h;
                        fc.diffusion(probe.t, x, dn);
                        x[i] = xi;
                        for (std::size_t k = 0; k < m; ++k) {
                            const double num = (up[k] - 2.0 * c0[k] + dn[k]) / (h * h);
                            st.update(an_hd[(i * n + j) * m + k], num);
                        }
                    } else {
                        const double xi = x[i], xj = x[j];
                        Vec pp(m), pm(m), mp(m), mm(m);
                        x[i] = xi + h; x[j] = xj + h;
                        fc.diffusion(probe.t, x, pp);
                        x[j] = xj - h;
                        fc.diffusion(probe.t, x, pm);
                        x[i] = xi - h; x[j] = xj + h;
                        fc.diffusion(probe.t, x, mp);
                        x[j] = xj - h;
                        fc.diffusion(probe.t, x, mm);
                        x[i] = xi; x[j] = xj;
                        for (std::size_t k = 0; k < m; ++k) {
                            const double num = (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h);
                            st.update(an_hd[(i * n + j) * m + k], num);
                            st.update(an_hd[(j * n + i) * m + k], num);
                        }
                    }
                }
            }
        }
        report.checks.push_back(finish("D.hess", true, st));
    } else {
        report.checks.push_back(finish("D.hess", false, {}));
    }

    // G, over the probe marks
    {
        auto make_eval = [&](double mark) {
            return [&fc, mark](double t, const Vec& x, const char* label) {
                const double v = fc.jump(t, x, mark);
                if (!std::isfinite(v)) throw ContractViolation(label, t, x);
                return v;
            };
        };
        if (fc.grad_jump) {
            CheckState st;
            for (const double mark : mark_list) {
                auto eval = make_eval(mark);
                auto an = [&, mark](double t, const Vec& x, Vec& out) { fc.grad_jump(t, x, mark, out); };
                const CheckState one = scalar_grad(eval, an, "G");
                st.max_abs = std::max(st.max_abs, one.max_abs);
                st.max_rel = std::max(st.max_rel, one.max_rel);
            }
            report.checks.push_back(finish("G.grad", true, st));
        } else {
            report.checks.push_back(finish("G.grad", false, {}));
        }
        if (fc.hess_jump) {
            CheckState st;
            for (const double mark : mark_list) {
                auto eval = make_eval(mark);
                auto an = [&, mark](double t, const Vec& x, Vec& out) { fc.hess_jump(t, x, mark, out); };
                const CheckState one = scalar_hess(eval, an, "G");
                st.max_abs = std::max(st.max_abs, one.max_abs);
                st.max_rel = std::max(st.max_rel, one.max_rel);
            }
            report.checks.push_back(finish("G.hess", true, st));
        } else {
            report.checks.push_back(finish("G.hess", false, {}));
        }
    }

    report.pass = std::all_of(report.checks.begin(), report.checks.end(),
                              [](const DerivativeCheck& c) { return c.pass; });
    return report;
}

DerivativeReport validate_scenario(const ScenarioSpec& spec) {
    std::vector<Probe> probes;
    const double shifts[] = {0.0, 0.5, -0.5, 1.25};
    const double times[] = {0.0, 0.37 * spec.horizon, 0.81 * spec.horizon};
    for (const double t : times) {
        for (const double s : shifts) {
            Probe probe;
            probe.t = t;
            probe.x = spec.initial_state;
            for (double& xi : probe.x) xi += s;
            probes.push_back(std::move(probe));
        }
    }
    const auto marks = spec.intensity.marks.support_probes();
    return validate_derivatives(spec.field, probes, marks);
}

}  // namespace itw
