#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "zplcav/dipole.hpp"

using namespace zplcav;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("rotation matrix") {
    CHECK(rotation_matrix(0.0, 0.0).isApprox(Eigen::Matrix3d::Identity(), 1e-15));
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ang(-180.0, 180.0);
    for (int i = 0; i < 50; ++i) {
        const auto a = rotation_matrix(ang(rng), ang(rng));
        CHECK((a * a.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK_THAT(a.determinant(), WithinAbs(1.0, 1e-12));
        CHECK(std::abs((a * Eigen::Vector3d::UnitX()).dot(a * Eigen::Vector3d::UnitY())) < 1e-12);
    }
    const Eigen::Vector3d x = rotation_matrix(49.0, 56.5) * Eigen::Vector3d::UnitX();
    CHECK_THAT(x(0) * x(0) + x(1) * x(1), WithinAbs(0.603, 0.001));
    CHECK_THAT(x(0) * x(0) + x(1) * x(1), WithinAbs(projected_intensities(49.0, 56.5).first, 1e-12));
}

TEST_CASE("polar angle from intensity extrema") {
    CHECK_THAT(polar_from_extrema(2.0, 2.0), WithinAbs(0.0, 1e-12));
    CHECK_THAT(polar_from_extrema(0.0, 2.0), WithinAbs(90.0, 1e-12));
    CHECK_THAT(polar_from_extrema(std::pow(std::cos(deg2rad(49.0)), 2), 1.0), WithinAbs(49.0, 1e-9));
    CHECK_THROWS_AS(polar_from_extrema(1.1, 1.0), DomainError);
}

TEST_CASE("thermal branching") {
    CHECK_THAT(thermal_ratio(1.5, 77.0), WithinAbs(0.798, 0.001));
    const auto [n2, n3] = branching_factors(0.8);
    CHECK_THAT(n2, WithinAbs(0.444, 0.001));
    CHECK_THAT(n3, WithinAbs(0.556, 0.001));
    CHECK_THAT(n2 + n3, WithinAbs(1.0, 1e-12));
    CHECK(thermal_ratio(0.0, 77.0) == 1.0);
    CHECK(branching_factors(1.0).first == 0.5);
    CHECK_THROWS_AS(thermal_ratio(1.5, 0.0), DomainError);
}

TEST_CASE("equivalent ratio") {
    CHECK_THAT(equivalent_circle_ratio(0.58, 0.8), WithinAbs(0.725, 1e-12));
    CHECK(equivalent_circle_ratio(0.8, 0.8) == 1.0);
    CHECK_THROWS_AS(equivalent_circle_ratio(0.58, 0.0), DomainError);
}

TEST_CASE("azimuth and out-of-plane angles") {
    const double beta = solve_beta(49.0, 0.73);
    CHECK_THAT(beta, WithinAbs(56.5, 0.3));
    const auto [px, py] = out_of_plane_angles(49.0, beta);
    CHECK_THAT(px, WithinAbs(39.0, 0.3));
    CHECK_THAT(py, WithinAbs(24.6, 0.3));
    CHECK_THAT(solve_beta(30.0, 1.0), WithinAbs(45.0, 1e-9));
    const auto [qx, qy] = out_of_plane_angles(30.0, 45.0);
    CHECK_THAT(qx, WithinAbs(qy, 1e-12));
}

TEST_CASE("closed-form azimuth agrees with a brute-force scan") {
    for (double r : {0.5, 0.73, 1.0, 1.4}) {
        const double theta = 49.0;
        double best = 0.0, err = 1e9;
        for (int k = 0; k <= 90000; ++k) {
            const double b = 0.001 * k;
            const auto [x2, y2] = projected_intensities(theta, b);
            if (std::abs(x2 / y2 - r) < err) {
                err = std::abs(x2 / y2 - r);
                best = b;
            }
        }
        CHECK_THAT(solve_beta(theta, r), WithinAbs(best, 0.002));
    }
}

TEST_CASE("unreachable ratios and degenerate tilt") {
    try {
        solve_beta(49.0, 3.0);
        FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
        CHECK_THAT(e.lower, WithinAbs(std::pow(std::cos(deg2rad(49.0)), 2), 1e-12));
        CHECK_THAT(e.upper, WithinAbs(1.0 / std::pow(std::cos(deg2rad(49.0)), 2), 1e-12));
    }
    CHECK_THROWS_AS(solve_beta(0.0, 1.0), DegenerateError);
}

TEST_CASE("overlap factors") {
    CHECK(xi_overlap(0.0) == 1.0);
    CHECK(xi_overlap(90.0) == 0.0);
    CHECK_THAT(xi_overlap(24.6), WithinAbs(0.826, 0.001));
    CHECK_THAT(xi_overlap(39.0), WithinAbs(0.604, 0.001));
    CHECK_THROWS_AS(xi_overlap(91.0), DomainError);
}

TEST_CASE("forward and inverse geometry are consistent") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> th(5.0, 85.0), be(0.5, 89.5);
    for (int i = 0; i < 200; ++i) {
        const double t = th(rng), b = be(rng);
        const auto [x2, y2] = projected_intensities(t, b);
        // Circle of equal-strength dipoles: extrema 1 and cos^2 theta.
        const double tt = polar_from_extrema(std::pow(std::cos(deg2rad(t)), 2), 1.0);
        CHECK_THAT(tt, WithinAbs(t, 1e-6));
        CHECK_THAT(solve_beta(tt, x2 / y2), WithinAbs(b, 1e-6));
    }
}

TEST_CASE("polarization samples recover the orientation") {
    const double theta = 49.0, beta = 56.8, thermal = 0.8;
    std::vector<PolarizationSample> s;
    for (int a = 0; a < 360; a += 10) s.push_back(simulate_polarization(theta, beta, thermal, a));
    const auto pa = analyze_polarization(s, thermal);
    CHECK_THAT(pa.theta_deg, WithinAbs(theta, 1e-6));
    CHECK_THAT(pa.beta_deg, WithinAbs(beta, 1e-6));
    // Overall intensity scale drops out.
    for (auto& x : s) {
        x.peak2 *= 7.0;
        x.peak3 *= 7.0;
    }
    const auto scaled = analyze_polarization(s, thermal);
    CHECK_THAT(scaled.beta_deg, WithinAbs(pa.beta_deg, 1e-9));
    CHECK_THAT(scaled.measured_ratio, WithinAbs(pa.measured_ratio, 1e-12));
}

TEST_CASE("summary of the paper dipole pair") {
    const auto s = summarize({49.0, solve_beta(49.0, 0.725), 1.5, 77.0});
    CHECK_THAT(s.n_x + s.n_y, WithinAbs(1.0, 1e-12));
    CHECK(s.xi_x < s.xi_y);
    CHECK(s.phi_x_deg >= 0.0);
    CHECK(s.phi_y_deg <= 90.0);
}
