#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>

#include "zplcav/cavity.hpp"

using namespace zplcav;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
CavityGeometry geom(double l_opt, double roc = 7.6) { return {roc, l_opt, {0.0, 0.0}, 1.0}; }
const double kInf = std::numeric_limits<double>::infinity();
} // namespace

TEST_CASE("Rayleigh range") {
    CHECK_THAT(rayleigh_range(geom(2.0, 4.0)), WithinRel(2.0, 1e-14));
    CHECK_THAT(rayleigh_range(geom(2.25)), WithinAbs(3.47, 0.01));
    CHECK(rayleigh_range(geom(7.6 - 1e-9)) < 1e-3);
    CHECK_THROWS_AS(rayleigh_range(geom(7.6)), InstabilityError);
    CHECK_THROWS_AS(rayleigh_range(CavityGeometry{7.6, 1.0, {-0.1, 0.0}, 1.0}), DomainError);
    CHECK_THROWS_AS(rayleigh_range(CavityGeometry{7.6, 1.0, {0.0, 0.0}, 0.9}), DomainError);
}

TEST_CASE("Gaussian mode volume") {
    CHECK_THAT(mode_volume_gaussian(geom(2.25), 637.0), WithinAbs(1.24, 0.01));
    CHECK_THAT(mode_volume_gaussian(geom(1.11), 637.0), WithinAbs(0.474, 1e-3));
    CHECK_THAT(mode_volume_gaussian(geom(2.25), 1274.0), WithinRel(2.0 * mode_volume_gaussian(geom(2.25), 637.0), 1e-14));
    const CavityGeometry split{7.6, 1.11, {0.5, 0.64}, 1.0};
    CHECK_THAT(mode_volume_gaussian(split, 637.0), WithinRel(mode_volume_gaussian(geom(2.25), 637.0), 1e-12));
}

TEST_CASE("mode volume grows with optical length up to three quarters of the radius") {
    double prev = 0.0;
    for (double l = 0.01; l <= 0.75 * 7.6; l += 0.01) {
        const double v = mode_volume_gaussian(geom(l), 637.0);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("planar-planar resonances are 2L/q") {
    const auto modes = resonant_wavelengths(geom(2.25, kInf), {500.0, 800.0}, 0);
    REQUIRE_FALSE(modes.empty());
    for (const auto& m : modes) CHECK_THAT(m.wavelength_nm, WithinRel(2.0 * 2250.0 / m.q_total, 1e-12));
}

TEST_CASE("resonances satisfy the phase condition and order with q") {
    const auto g = geom(2.25);
    const auto modes = resonant_wavelengths(g, {550.0, 720.0}, 4);
    REQUIRE(modes.size() > 5);
    for (const auto& m : modes) {
        CHECK(std::abs(phase_residual(g, m.wavelength_nm, m.q_total, m.m, m.n)) < 1e-10);
        CHECK(m.mode_volume_um3 > 0.0);
        if ((m.m + m.n) % 2) CHECK(m.dark_on_axis);
        if (m.m % 2 == 0 && m.n % 2 == 0) CHECK_FALSE(m.dark_on_axis);
        for (const auto& o : modes)
            if (o.m == m.m && o.n == m.n && o.q_total > m.q_total) CHECK(o.wavelength_nm < m.wavelength_nm);
    }
    CHECK(resonant_wavelengths(g, {600.0, 600.0}).empty());
}

TEST_CASE("transverse mode spacing near 637 nm") {
    const auto g = geom(2.25);
    const auto modes = resonant_wavelengths(g, {600.0, 680.0}, 1);
    double l00 = 0.0, l10 = 0.0;
    int q = 0;
    for (const auto& m : modes)
        if (m.m == 0 && m.n == 0 && std::abs(m.wavelength_nm - 637.0) < 40.0) {
            l00 = m.wavelength_nm;
            q = m.q_total;
        }
    for (const auto& m : modes)
        if (m.m == 1 && m.n == 0 && m.q_total == q) l10 = m.wavelength_nm;
    REQUIRE(l00 > 0.0);
    REQUIRE(l10 > 0.0);
    const double approx = l00 * l00 * gouy_phase(g) / (2.0 * std::numbers::pi * 2250.0);
    CHECK_THAT(l00 - l10, WithinRel(approx, 0.05));
    CHECK_THAT(l00 - l10, WithinAbs(16.5, 1.0));
}

TEST_CASE("quality factor from linewidth") {
    CHECK_THAT(q_from_linewidth(637.0, 0.7), WithinAbs(910.0, 0.5));
    CHECK_THAT(q_from_linewidth(637.0, 0.2), WithinAbs(3185.0, 0.5));
    CHECK(q_from_linewidth(637.0, 637.0) == 1.0);
    CHECK_THROWS_AS(q_from_linewidth(637.0, 0.0), DomainError);
}

TEST_CASE("finesse agrees with the Airy transmission width") {
    const double r = 0.99;
    const double f = finesse_from_reflectivity(r, r);
    CHECK_THAT(f, WithinAbs(312.6, 0.1));
    // Numerical half-maximum of 1 / (1 + K sin^2(d/2)).
    const double k = 4.0 * r / ((1.0 - r) * (1.0 - r));
    double lo = 0.0, hi = 0.5;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (1.0 / (1.0 + k * std::pow(std::sin(mid / 2.0), 2)) > 0.5 ? lo : hi) = mid;
    }
    CHECK_THAT(2.0 * std::numbers::pi / (2.0 * lo), WithinRel(f, 1e-4));
}

TEST_CASE("mirror-limited linewidth") {
    const double f = finesse_from_reflectivity(0.9999, 0.997);
    CHECK_THAT(f, WithinRel(2025.0, 0.01));
    CHECK_THAT(linewidth_from_finesse(637.0, 2.25, f), WithinAbs(0.045, 0.001));
    double prev = 0.0;
    for (double r = 0.1; r < 0.999; r += 0.05) {
        const double v = finesse_from_reflectivity(r, r);
        CHECK(v > prev);
        prev = v;
    }
    CHECK_THROWS_AS(finesse_from_reflectivity(1.0, 0.5), DomainError);
}

TEST_CASE("maximum Purcell factor") {
    CHECK_THAT(f_max(637.0, 1.0, 637.0 / 1.1, 1.24), WithinAbs(9.2, 0.1));
    CHECK_THAT(f_max(637.0, 1.0, 637.0 / 0.3, 1.24), WithinAbs(33.6, 0.2));
    CHECK_THAT(f_max(637.0, 1.0, 900.0, 2.48), WithinRel(0.5 * f_max(637.0, 1.0, 900.0, 1.24), 1e-14));
    const double ref = f_max(637.0, 1.0, 1.0, 1.0);
    for (double q : {10.0, 910.0, 5e4})
        for (double v : {0.1, 1.24, 30.0}) CHECK_THAT(f_max(637.0, 1.0, q, v) * v / q, WithinRel(ref, 1e-13));
    CHECK_THROWS_AS(f_max(637.0, 1.0, 0.0, 1.0), DomainError);
}

TEST_CASE("on-axis Hermite-Gauss weights") {
    CHECK(hermite_gauss_axis_weight(0) == 1.0);
    CHECK(hermite_gauss_axis_weight(1) == 0.0);
    CHECK_THAT(hermite_gauss_axis_weight(2), WithinAbs(0.5, 1e-15));
    CHECK_THAT(hermite_gauss_axis_weight(4), WithinAbs(0.375, 1e-15));
}
