#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "zplcav/errors.hpp"

namespace zplcav {

struct GaussLegendreRule {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights;
};

// Nodes and weights by Newton iteration on P_n from the Chebyshev guess.
inline GaussLegendreRule gauss_legendre(int n) {
    if (n < 1) throw DomainError("gauss_legendre: order must be >= 1");
    GaussLegendreRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        // Recompute the derivative at the converged node for the weight.
        double p0 = 1.0, p1 = 0.0;
        for (int j = 1; j <= n; ++j) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        rule.nodes[lo] = -z;
        rule.nodes[hi] = z;
        rule.weights[lo] = rule.weights[hi] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return rule;
}

// Fixed composite rule: `panels` equal panels of an `order`-point rule.
// F returns std::array<double, K>, so several integrals can share one set of
// integrand evaluations.
template <std::size_t K, class F>
std::array<double, K> composite_gauss_legendre(F&& f, double a, double b, int panels, const GaussLegendreRule& rule) {
    std::array<double, K> sum{};
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const auto v = f(mid + 0.5 * h * rule.nodes[i]);
            for (std::size_t k = 0; k < K; ++k) sum[k] += 0.5 * h * rule.weights[i] * v[k];
        }
    }
    return sum;
}

template <std::size_t K>
struct QuadratureResult {
    std::array<double, K> value{};
    int panels = 0;
    bool converged = false;
};

// Composite Gauss-Legendre with panel doubling until every component changes
// by less than `rel_tol` (relative to its magnitude, floored at abs_floor).
template <std::size_t K, class F>
QuadratureResult<K> adaptive_gauss_legendre(F&& f, double a, double b, double rel_tol = 1e-6, int order = 16,
                                            int start_panels = 4, int max_panels = 1 << 14,
                                            double abs_floor = 1e-300) {
    if (!(b > a)) throw DomainError("adaptive_gauss_legendre: need a < b");
    const auto rule = gauss_legendre(order);
    QuadratureResult<K> out;
    int panels = start_panels;
    auto prev = composite_gauss_legendre<K>(f, a, b, panels, rule);
    while (panels < max_panels) {
        panels *= 2;
        auto next = composite_gauss_legendre<K>(f, a, b, panels, rule);
        bool ok = true;
        for (std::size_t k = 0; k < K; ++k) {
            const double scale = std::max(std::abs(next[k]), abs_floor);
            if (std::abs(next[k] - prev[k]) > rel_tol * scale) ok = false;
        }
        prev = next;
        if (ok) {
            out.converged = true;
            break;
        }
    }
    out.value = prev;
    out.panels = panels;
    return out;
}

} // namespace zplcav
