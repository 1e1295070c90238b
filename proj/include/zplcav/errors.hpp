#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace zplcav {

// Every library failure derives from this. `kind()` is a stable machine-readable
// tag used by the CLI when emitting error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error("domain", what) {}
};

struct ResolutionError : Error {
    explicit ResolutionError(const std::string& what) : Error("resolution", what) {}
};

struct InstabilityError : Error {
    explicit InstabilityError(const std::string& what) : Error("instability", what) {}
};

struct AmbiguityError : Error {
    explicit AmbiguityError(const std::string& what) : Error("ambiguity", what) {}
};

struct ConfigurationError : Error {
    explicit ConfigurationError(const std::string& what) : Error("configuration", what) {}
};

struct DegenerateError : Error {
    explicit DegenerateError(const std::string& what) : Error("degenerate", what) {}
};

struct ResonanceNotFound : Error {
    explicit ResonanceNotFound(const std::string& what) : Error("resonance_not_found", what) {}
};

// Requested ratio is outside what the geometry can produce.
struct InfeasibleError : Error {
    InfeasibleError(const std::string& what, double lo, double hi)
        : Error("infeasible", what), lower(lo), upper(hi) {}
    double lower;
    double upper;
};

// An iterative solver ran out of budget. The best parameters seen are kept so
// callers can still inspect or report them.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& what, std::vector<double> best, double best_residual)
        : Error("convergence", what), best_parameters(std::move(best)), residual(best_residual) {}
    std::vector<double> best_parameters;
    double residual;
};

// Collected validation problems, reported together.
struct ValidationError : Error {
    explicit ValidationError(std::vector<std::string> msgs)
        : Error("validation", join(msgs)), messages(std::move(msgs)) {}
    std::vector<std::string> messages;

private:
    static std::string join(const std::vector<std::string>& m) {
        std::string out;
        for (const auto& s : m) {
            if (!out.empty()) out += "; ";
            out += s;
        }
        return out;
    }
};

} // namespace zplcav
