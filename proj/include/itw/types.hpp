#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace itw {

using Vec = std::vector<double>;

/// Dense row-major matrix sized once at construction.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Which jump-measure representation a coefficient set is written in:
/// non-centered (raw Poisson measure) or centered (compensated measure).
enum class Representation { NonCentered, Centered };

inline const char* to_string(Representation r) {
    return r == Representation::NonCentered ? "non-centered" : "centered";
}

/// A coefficient evaluated to a non-finite value.
class ContractViolation : public std::runtime_error {
public:
    ContractViolation(const std::string& coefficient, double t, const Vec& x)
        : std::runtime_error(format(coefficient, t, x)), coefficient_(coefficient) {}
    explicit ContractViolation(const std::string& what)
        : std::runtime_error(what) {}

    const std::string& coefficient() const { return coefficient_; }

private:
    static std::string format(const std::string& c, double t, const Vec& x);
    std::string coefficient_;
};

/// The integrator hit a non-finite state.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t step, const std::string& what)
        : std::runtime_error(what), step_(step) {}

    std::size_t step() const { return step_; }

private:
    std::size_t step_ = 0;
};

/// Config-file problem, with the 1-based line it was found on (0 = no line).
class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& what)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    int line() const { return line_; }

private:
    int line_ = 0;
};

}  // namespace itw
