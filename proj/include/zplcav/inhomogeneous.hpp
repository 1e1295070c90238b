#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "zplcav/errors.hpp"
#include "zplcav/quadrature.hpp"
#include "zplcav/spectrum.hpp"

namespace zplcav {

// Gaussian distribution of cavity positions around `center_nm`. A zero fwhm
// is the delta-distribution limit and is evaluated analytically.
struct InhomogeneousModel {
    double center_nm = 0.0;
    double fwhm_nm = 0.0;
    std::function<double(double)> f_zpl_curve; // F_ZPL(lambda_cav) >= 0

    double sigma() const { return fwhm_nm / kFwhmPerSigma; }
    bool is_delta() const { return fwhm_nm == 0.0; }
    Window window() const { return {center_nm - 5.0 * sigma(), center_nm + 5.0 * sigma()}; }

    // Gaussian density renormalized over the +-5 sigma window.
    double density(double lambda) const {
        const double s = sigma();
        const double z = (lambda - center_nm) / s;
        return std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi) * std::erf(5.0 / std::sqrt(2.0)));
    }
};

struct InhomQuadratureOptions {
    double rel_tol = 1e-6;
    int order = 16;
};

// Quadrature nodes over the distribution: position, g * weight, F_ZPL.
struct InhomNodes {
    std::vector<double> lambda;
    std::vector<double> weight;
    std::vector<double> f;
    int panels = 0;
};

namespace detail {

inline void check_inhom(const InhomogeneousModel& m) {
    if (!m.f_zpl_curve) throw DomainError("InhomogeneousModel: missing F_ZPL curve");
    if (!(m.fwhm_nm >= 0.0)) throw DomainError("InhomogeneousModel: fwhm must be >= 0");
}

inline double checked_f(const InhomogeneousModel& m, double lambda) {
    const double v = m.f_zpl_curve(lambda);
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("InhomogeneousModel: F_ZPL curve must be finite and >= 0");
    return v;
}

} // namespace detail

// Adaptive composite Gauss-Legendre over +-5 sigma; panels double until the
// integrals of g, gF and gF^2 are all stable to rel_tol.
inline InhomNodes inhom_nodes(const InhomogeneousModel& m, const InhomQuadratureOptions& opt = {}) {
    detail::check_inhom(m);
    InhomNodes nodes;
    if (m.is_delta()) {
        nodes.lambda = {m.center_nm};
        nodes.weight = {1.0};
        nodes.f = {detail::checked_f(m, m.center_nm)};
        return nodes;
    }
    const Window w = m.window();
    auto integrand = [&](double l) {
        const double g = m.density(l);
        const double f = detail::checked_f(m, l);
        return std::array<double, 3>{g, g * f, g * f * f};
    };
    const auto q = adaptive_gauss_legendre<3>(integrand, w.lo, w.hi, opt.rel_tol, opt.order, 4, 1 << 12, 1e-30);
    if (!q.converged) throw ConvergenceError("inhom_nodes: quadrature did not converge", {}, 0.0);
    const auto rule = gauss_legendre(opt.order);
    const double h = w.width() / q.panels;
    for (int p = 0; p < q.panels; ++p) {
        const double mid = w.lo + (p + 0.5) * h;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double l = mid + 0.5 * h * rule.nodes[i];
            nodes.lambda.push_back(l);
            nodes.weight.push_back(0.5 * h * rule.weights[i] * m.density(l));
            nodes.f.push_back(detail::checked_f(m, l));
        }
    }
    nodes.panels = q.panels;
    return nodes;
}

// integral g F^2 / integral g F: the ZPL part of the initial decay-rate
// enhancement of the ensemble.
inline double f_inhom(const InhomNodes& n) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n.f.size(); ++i) {
        num += n.weight[i] * n.f[i] * n.f[i];
        den += n.weight[i] * n.f[i];
    }
    if (den < 1e-30) throw DegenerateError("f_inhom: no cavity emission anywhere in the distribution");
    return num / den;
}

inline double f_inhom(const InhomogeneousModel& m, const InhomQuadratureOptions& opt = {}) {
    return f_inhom(inhom_nodes(m, opt));
}

// I(t) = integral g A exp(-gamma t), gamma = gamma0 (1 + F), A proportional to
// gamma * beta = gamma0 F, normalized to I(0) = 1. Falls back to the
// F -> 0 limit exp(-gamma0 t) when no node carries cavity emission.
inline std::vector<double> decay_curve(const InhomNodes& n, double gamma0, std::span<const double> t_ns) {
    if (t_ns.empty()) throw DomainError("decay_curve: empty time grid");
    if (!(gamma0 > 0.0)) throw DomainError("decay_curve: gamma0 must be > 0");
    for (std::size_t i = 0; i < t_ns.size(); ++i)
        if (!(t_ns[i] >= 0.0) || (i > 0 && !(t_ns[i] > t_ns[i - 1])))
            throw DomainError("decay_curve: time grid must be >= 0 and ascending");
    double norm = 0.0;
    for (std::size_t i = 0; i < n.f.size(); ++i) norm += n.weight[i] * n.f[i];
    std::vector<double> out(t_ns.size());
    for (std::size_t j = 0; j < t_ns.size(); ++j) {
        if (norm < 1e-30) {
            out[j] = std::exp(-gamma0 * t_ns[j]);
            continue;
        }
        double s = 0.0;
        for (std::size_t i = 0; i < n.f.size(); ++i)
            s += n.weight[i] * n.f[i] * std::exp(-gamma0 * (1.0 + n.f[i]) * t_ns[j]);
        out[j] = s / norm;
    }
    return out;
}

inline std::vector<double> decay_curve(const InhomogeneousModel& m, double gamma0, std::span<const double> t_ns,
                                       const InhomQuadratureOptions& opt = {}) {
    return decay_curve(inhom_nodes(m, opt), gamma0, t_ns);
}

struct SlopeConsistency {
    double gamma_ratio = 0.0; // gamma_inhom / gamma0 from the decay curve
    double f_inhom = 0.0;     // closed form
    double relative_discrepancy = 0.0;
    bool consistent = false; // discrepancy <= 1e-3
};

// Forward-difference initial log-slope of the decay curve (step 1e-4/gamma0)
// against the closed form.
inline SlopeConsistency f_inhom_vs_slope_consistency(const InhomNodes& n, double gamma0) {
    const double h = 1e-4 / gamma0;
    const std::array<double, 2> t{0.0, h};
    const auto i = decay_curve(n, gamma0, t);
    SlopeConsistency r;
    r.gamma_ratio = -(i[1] - i[0]) / (h * i[0]) / gamma0;
    r.f_inhom = f_inhom(n);
    r.relative_discrepancy = std::abs((r.gamma_ratio - 1.0) - r.f_inhom) / std::max(std::abs(r.f_inhom), 1e-300);
    r.consistent = r.relative_discrepancy <= 1e-3;
    return r;
}

inline SlopeConsistency f_inhom_vs_slope_consistency(const InhomogeneousModel& m, double gamma0,
                                                     const InhomQuadratureOptions& opt = {}) {
    return f_inhom_vs_slope_consistency(inhom_nodes(m, opt), gamma0);
}

} // namespace zplcav
