#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "itw/noise.hpp"
#include "itw/types.hpp"

namespace itw {

/// Coefficients of the state process dx = a dt + b dW + jump terms.
/// They depend on time (and the jump mark) only; callables write into
/// caller-owned buffers so evaluation never allocates.
struct ProcessCoefficients {
    std::size_t n = 1;  // state dimension
    std::size_t m = 1;  // Wiener dimension

    std::function<void(double t, std::span<double> out)> drift;              // a(t), out[n]
    std::function<void(double t, std::span<double> out)> diffusion;          // b(t), out[n*m], (i,k) at i*m+k
    std::function<void(double t, double mark, std::span<double> out)> jump;  // g(t, mark), out[n]

    Representation representation = Representation::NonCentered;
};

/// Coefficients of the scalar random field dF = Q dt + D_k dW_k + jump terms,
/// plus optional analytic space derivatives (an empty std::function means
/// "not supplied"). Packing: gradients are [n] (or [n*m] for D, (i,k) at
/// i*m+k); Hessians are [n*n] (or [n*n*m] for D, (i,j,k) at (i*n+j)*m+k).
struct FieldCoefficients {
    std::size_t n = 1;
    std::size_t m = 1;

    std::function<double(double t, std::span<const double> x)> drift;                          // Q
    std::function<void(double t, std::span<const double> x, std::span<double> out)> diffusion; // D
    std::function<double(double t, std::span<const double> x, double mark)> jump;              // G
    std::function<double(std::span<const double> x)> initial;                                  // F0

    std::function<void(double, std::span<const double>, std::span<double>)> grad_drift;
    std::function<void(double, std::span<const double>, std::span<double>)> grad_diffusion;
    std::function<void(double, std::span<const double>, double, std::span<double>)> grad_jump;
    std::function<void(std::span<const double>, std::span<double>)> grad_initial;

    std::function<void(double, std::span<const double>, std::span<double>)> hess_drift;
    std::function<void(double, std::span<const double>, std::span<double>)> hess_diffusion;
    std::function<void(double, std::span<const double>, double, std::span<double>)> hess_jump;
    std::function<void(std::span<const double>, std::span<double>)> hess_initial;

    Representation representation = Representation::NonCentered;

    bool has_analytic_gradients() const {
        return grad_drift && grad_diffusion && grad_jump && grad_initial;
    }
    bool has_analytic_hessians() const {
        return hess_drift && hess_diffusion && hess_jump && hess_initial;
    }
};

/// One experiment: a process, a field driven by the same noise, the jump
/// intensity, the starting point and the horizon.
struct ScenarioSpec {
    std::string name;
    std::size_t n = 1;
    std::size_t m = 1;
    ProcessCoefficients process;
    FieldCoefficients field;
    IntensitySpec intensity;
    Vec initial_state;    // z
    double horizon = 1.0; // T

    /// Declared |residual| bound for scenarios whose discretization error
    /// vanishes identically (affine field, jump-only dynamics).
    std::optional<double> exactness_tol;

    /// Common representation of process and field; throws if they disagree.
    Representation representation() const;
};

using ParamMap = std::map<std::string, double>;

/// Parameter schema of a catalog entry.
struct CatalogInfo {
    std::vector<std::string> required;
    std::map<std::string, double> defaults;
    std::size_t n = 1;
    std::size_t m = 1;
    Representation representation = Representation::NonCentered;
    std::string summary;
};

/// Built-in scenarios. Unknown names, missing required parameters and
/// unknown parameter keys all throw std::invalid_argument.
ScenarioSpec catalog(const std::string& name, const ParamMap& params);
std::vector<std::string> catalog_names();
CatalogInfo catalog_info(const std::string& name);

struct ConversionResult {
    ScenarioSpec spec;
    /// True when the input was already in the requested representation and
    /// the conversion was a no-op.
    bool already_in_target_form = false;
};

/// Centered -> non-centered: drift gains -∫g dΠ, field drift gains -∫G dΠ;
/// diffusion, jump amplitudes and the initial field are untouched.
ConversionResult to_noncentered(const ScenarioSpec& spec);

/// Non-centered -> centered, the algebraic inverse.
ConversionResult to_centered(const ScenarioSpec& spec);

struct Probe {
    double t = 0.0;
    Vec x;
};

struct DerivativeCheck {
    std::string coefficient;  // "F0", "Q", "D", "G"
    bool analytic = false;    // false: numeric-only, nothing compared
    double max_abs_error = 0.0;
    double max_rel_error = 0.0;
    bool pass = true;
};

struct DerivativeReport {
    std::vector<DerivativeCheck> checks;
    bool pass = true;
};

/// Compares every supplied analytic derivative against central differences
/// at the probes (relative tolerance 1e-5). Coefficients without analytic
/// derivatives are reported as numeric-only, never failed. Marks default to
/// a small canonical set when none are given.
DerivativeReport validate_derivatives(const FieldCoefficients& fc,
                                      std::span<const Probe> probes,
                                      std::span<const double> marks = {});

/// validate_derivatives with probes along the scenario's own time grid and
/// marks from its intensity support.
DerivativeReport validate_scenario(const ScenarioSpec& spec);

}  // namespace itw
