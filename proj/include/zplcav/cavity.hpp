#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "zplcav/errors.hpp"
#include "zplcav/spectrum.hpp"

namespace zplcav {

// Plano-concave open cavity. Lengths in micrometres.
struct CavityGeometry {
    double roc_um = 0.0; // +inf for a planar-planar resonator
    double gap_um = 0.0;
    std::array<double, 2> penetration_um{0.0, 0.0};
    double medium_index = 1.0;

    double optical_length() const { return gap_um + penetration_um[0] + penetration_um[1]; }
};

struct CavityMode {
    int q = 0;       // intensity lobes in the physical gap (displayed index)
    int q_total = 0; // longitudinal index of the total-phase resonance condition
    int m = 0;
    int n = 0;
    double wavelength_nm = 0.0;
    double linewidth_fwhm_nm = 0.0; // 0 when not resolved
    double mode_volume_um3 = 0.0;   // on-axis effective volume; inf for dark modes
    bool dark_on_axis = false;

    double quality_factor() const { return wavelength_nm / linewidth_fwhm_nm; }
};

inline void validate(const CavityGeometry& g) {
    if (!(g.medium_index >= 1.0)) throw DomainError("CavityGeometry: medium_index must be >= 1");
    if (!(g.gap_um > 0.0)) throw DomainError("CavityGeometry: gap must be > 0");
    if (!(g.penetration_um[0] >= 0.0 && g.penetration_um[1] >= 0.0))
        throw DomainError("CavityGeometry: penetration depths must be >= 0");
    if (!(g.roc_um > 0.0)) throw DomainError("CavityGeometry: radius of curvature must be > 0");
    if (!(g.optical_length() < g.roc_um))
        throw InstabilityError("CavityGeometry: optical length must be shorter than the radius of curvature");
}

inline double rayleigh_range(const CavityGeometry& g) {
    validate(g);
    const double l = g.optical_length();
    if (std::isinf(g.roc_um)) return std::numeric_limits<double>::infinity();
    return l * std::sqrt(g.roc_um / l - 1.0);
}

// Gaussian-beam estimate lambda * z_R * L / 4, in um^3.
inline double mode_volume_gaussian(const CavityGeometry& g, double wavelength_nm) {
    if (!(wavelength_nm > 0.0)) throw DomainError("mode_volume_gaussian: wavelength must be > 0");
    return 1e-3 * wavelength_nm * rayleigh_range(g) * g.optical_length() / 4.0;
}

// Single-pass Gouy phase of the fundamental mode.
inline double gouy_phase(const CavityGeometry& g) {
    validate(g);
    if (std::isinf(g.roc_um)) return 0.0;
    return std::acos(std::sqrt(1.0 - g.optical_length() / g.roc_um));
}

// 2*pi*L/lambda - q*pi - (m+n+1)*gouy; zero on resonance.
inline double phase_residual(const CavityGeometry& g, double wavelength_nm, int q_total, int m, int n) {
    const double l_nm = 1e3 * g.optical_length();
    return 2.0 * std::numbers::pi * l_nm / wavelength_nm - q_total * std::numbers::pi - (m + n + 1) * gouy_phase(g);
}

// On-axis intensity of the 1-D Hermite-Gauss mode of order k relative to k = 0.
inline double hermite_gauss_axis_weight(int k) {
    if (k % 2 != 0) return 0.0;
    // k! / (2^k ((k/2)!)^2)
    double w = 1.0;
    for (int i = 1; i <= k / 2; ++i) w *= static_cast<double>(k / 2 + i) / (4.0 * i);
    return w;
}

inline int gap_lobe_count(double gap_um, double wavelength_nm) {
    return static_cast<int>(std::ceil(2e3 * gap_um / wavelength_nm - 1e-9));
}

// All Hermite-Gauss resonances with m + n <= max_order inside `band` (nm),
// sorted by wavelength. Linewidth is left unresolved.
inline std::vector<CavityMode> resonant_wavelengths(const CavityGeometry& g, Window band, int max_order = 4) {
    validate(g);
    if (max_order < 0) throw DomainError("resonant_wavelengths: max_order must be >= 0");
    std::vector<CavityMode> out;
    if (!(band.hi > band.lo)) return out;
    const double l_nm = 1e3 * g.optical_length();
    const double gouy_frac = gouy_phase(g) / std::numbers::pi;
    const double v00_ref = mode_volume_gaussian(g, 1.0); // scales linearly in wavelength
    for (int s = 0; s <= max_order; ++s) {
        const double shift = (s + 1) * gouy_frac;
        const int q_lo = std::max(1, static_cast<int>(std::ceil(2.0 * l_nm / band.hi - shift)));
        const int q_hi = static_cast<int>(std::floor(2.0 * l_nm / band.lo - shift));
        for (int q = q_lo; q <= q_hi; ++q) {
            const double lambda = 2.0 * l_nm / (q + shift);
            if (!band.contains(lambda)) continue;
            for (int m = 0; m <= s; ++m) {
                CavityMode mode;
                mode.q_total = q;
                mode.m = m;
                mode.n = s - m;
                mode.wavelength_nm = lambda;
                mode.q = gap_lobe_count(g.gap_um, lambda);
                mode.dark_on_axis = (mode.m % 2 != 0) || (mode.n % 2 != 0);
                const double axis = hermite_gauss_axis_weight(mode.m) * hermite_gauss_axis_weight(mode.n);
                mode.mode_volume_um3 =
                    axis > 0.0 ? v00_ref * lambda / axis : std::numeric_limits<double>::infinity();
                out.push_back(mode);
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const CavityMode& a, const CavityMode& b) {
        if (a.wavelength_nm != b.wavelength_nm) return a.wavelength_nm < b.wavelength_nm;
        return a.m < b.m;
    });
    return out;
}

inline double q_from_linewidth(double wavelength_nm, double fwhm_nm) {
    if (!(fwhm_nm > 0.0)) throw DomainError("q_from_linewidth: fwhm must be > 0");
    return wavelength_nm / fwhm_nm;
}

inline double finesse_from_reflectivity(double r1, double r2) {
    if (!(r1 > 0.0 && r1 < 1.0 && r2 > 0.0 && r2 < 1.0))
        throw DomainError("finesse_from_reflectivity: reflectivities must lie in (0, 1)");
    const double rr = std::sqrt(r1 * r2);
    return std::numbers::pi * std::sqrt(rr) / (1.0 - rr);
}

// fwhm = lambda^2 / (2 L F), nm.
inline double linewidth_from_finesse(double wavelength_nm, double optical_length_um, double finesse) {
    if (!(finesse > 0.0) || !(optical_length_um > 0.0))
        throw DomainError("linewidth_from_finesse: finesse and length must be > 0");
    return wavelength_nm * wavelength_nm / (2.0 * 1e3 * optical_length_um * finesse);
}

// Maximum Purcell factor (3 / 4pi^2) (lambda/n)^3 Q / V.
inline double f_max(double wavelength_nm, double medium_index, double q_factor, double mode_volume_um3) {
    if (!(wavelength_nm > 0.0 && medium_index > 0.0 && q_factor > 0.0 && mode_volume_um3 > 0.0))
        throw DomainError("f_max: all inputs must be positive");
    const double lam_um = 1e-3 * wavelength_nm / medium_index;
    return 3.0 / (4.0 * std::numbers::pi * std::numbers::pi) * lam_um * lam_um * lam_um * q_factor /
           mode_volume_um3;
}

} // namespace zplcav
