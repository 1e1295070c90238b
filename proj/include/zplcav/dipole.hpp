#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "zplcav/errors.hpp"

namespace zplcav {

inline constexpr double kBoltzmannMevPerK = 0.0861733;

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

// Orientation of the two orthogonal excited-state dipoles. Angles in degrees.
struct DipolePair {
    double theta_deg = 0.0;   // defect axis vs cavity optical axis
    double beta_deg = 0.0;    // rotation of the pair about the defect axis
    double delta_e_mev = 0.0; // excited-state splitting
    double temperature_k = 0.0;
};

// Axial rotation by beta followed by polar tilt by theta.
inline Eigen::Matrix3d rotation_matrix(double theta_deg, double beta_deg) {
    const double t = deg2rad(theta_deg), b = deg2rad(beta_deg);
    const double ct = std::cos(t), st = std::sin(t), cb = std::cos(b), sb = std::sin(b);
    Eigen::Matrix3d a;
    a << cb, -sb, 0.0,
         ct * sb, ct * cb, -st,
         st * sb, st * cb, ct;
    return a;
}

// In-plane projected intensities (X'^2, Y'^2) of the rotated unit dipoles.
inline std::pair<double, double> projected_intensities(double theta_deg, double beta_deg) {
    const double s2t = std::pow(std::sin(deg2rad(theta_deg)), 2);
    const double s2b = std::pow(std::sin(deg2rad(beta_deg)), 2);
    return {1.0 - s2t * s2b, 1.0 - s2t * (1.0 - s2b)};
}

// I_min = I_max cos^2(theta).
inline double polar_from_extrema(double i_min, double i_max) {
    if (!(i_max > 0.0) || !(i_min >= 0.0)) throw DomainError("polar_from_extrema: need i_max > 0, i_min >= 0");
    if (i_min > i_max) throw DomainError("polar_from_extrema: i_min exceeds i_max");
    return rad2deg(std::acos(std::sqrt(i_min / i_max)));
}

// Boltzmann population ratio of the upper to the lower excited level.
inline double thermal_ratio(double delta_e_mev, double temperature_k) {
    if (!(temperature_k > 0.0)) throw DomainError("thermal_ratio: temperature must be > 0");
    return std::exp(-delta_e_mev / (kBoltzmannMevPerK * temperature_k));
}

// (n_upper, n_lower) = (ratio, 1) / (1 + ratio).
inline std::pair<double, double> branching_factors(double ratio) {
    if (!(ratio >= 0.0)) throw DomainError("branching_factors: ratio must be >= 0");
    return {ratio / (1.0 + ratio), 1.0 / (1.0 + ratio)};
}

// Removes the thermal weighting from a measured peak intensity ratio.
inline double equivalent_circle_ratio(double measured_ratio, double thermal) {
    if (!(thermal > 0.0)) throw DomainError("equivalent_circle_ratio: thermal ratio must be > 0");
    if (!(measured_ratio > 0.0)) throw DomainError("equivalent_circle_ratio: measured ratio must be > 0");
    return measured_ratio / thermal;
}

// Closed-form beta with X'^2 / Y'^2 = R. Throws InfeasibleError outside
// [cos^2 theta, 1/cos^2 theta].
inline double solve_beta(double theta_deg, double ratio) {
    if (!(theta_deg > 0.0 && theta_deg < 90.0)) {
        if (theta_deg == 0.0) throw DegenerateError("solve_beta: beta is unobservable at theta = 0");
        throw DomainError("solve_beta: theta must lie in (0, 90) degrees");
    }
    const double c2 = std::pow(std::cos(deg2rad(theta_deg)), 2);
    const double lo = c2, hi = 1.0 / c2;
    if (!(ratio >= lo && ratio <= hi))
        throw InfeasibleError("solve_beta: ratio outside attainable interval [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "]",
                              lo, hi);
    const double s2 = 1.0 - c2;
    const double u = std::clamp((1.0 - ratio + ratio * s2) / (s2 * (1.0 + ratio)), 0.0, 1.0);
    return rad2deg(std::asin(std::sqrt(u)));
}

// Angles (phi_X', phi_Y') between each rotated dipole and the mirror plane.
inline std::pair<double, double> out_of_plane_angles(double theta_deg, double beta_deg) {
    const auto [x2, y2] = projected_intensities(theta_deg, beta_deg);
    return {rad2deg(std::acos(std::sqrt(std::clamp(x2, 0.0, 1.0)))),
            rad2deg(std::acos(std::sqrt(std::clamp(y2, 0.0, 1.0))))};
}

// Overlap with an in-plane cavity field at its maximum: cos^2(phi).
inline double xi_overlap(double phi_deg) {
    if (!(phi_deg >= 0.0 && phi_deg <= 90.0)) throw DomainError("xi_overlap: phi must lie in [0, 90]");
    if (phi_deg == 90.0) return 0.0;
    return std::pow(std::cos(deg2rad(phi_deg)), 2);
}

struct DipoleSummary {
    double theta_deg = 0.0;
    double beta_deg = 0.0;
    double phi_x_deg = 0.0; // peak 2
    double phi_y_deg = 0.0; // peak 3
    double xi_x = 0.0;
    double xi_y = 0.0;
    double thermal = 0.0;
    double n_x = 0.0;
    double n_y = 0.0;
};

inline DipoleSummary summarize(const DipolePair& d) {
    DipoleSummary s;
    s.theta_deg = d.theta_deg;
    s.beta_deg = d.beta_deg;
    std::tie(s.phi_x_deg, s.phi_y_deg) = out_of_plane_angles(d.theta_deg, d.beta_deg);
    s.xi_x = xi_overlap(s.phi_x_deg);
    s.xi_y = xi_overlap(s.phi_y_deg);
    s.thermal = thermal_ratio(d.delta_e_mev, d.temperature_k);
    std::tie(s.n_x, s.n_y) = branching_factors(s.thermal);
    return s;
}

// Polar-plot samples for the two ZPL peaks.
struct PolarizationSample {
    double angle_deg = 0.0;
    double peak2 = 0.0;
    double peak3 = 0.0;
};

// I(a) = mean + amp cos(2(a - a0)), fitted by linear least squares.
struct Cos2Fit {
    double mean = 0.0;
    double amplitude = 0.0;
    double phase_deg = 0.0;
    double i_max() const { return mean + amplitude; }
    double i_min() const { return mean - amplitude; }
};

inline Cos2Fit fit_cos2(std::span<const double> angles_deg, std::span<const double> intensity) {
    if (angles_deg.size() != intensity.size() || angles_deg.size() < 3)
        throw DomainError("fit_cos2: need at least 3 samples");
    Eigen::MatrixXd a(static_cast<Eigen::Index>(angles_deg.size()), 3);
    Eigen::VectorXd y(static_cast<Eigen::Index>(angles_deg.size()));
    for (std::size_t i = 0; i < angles_deg.size(); ++i) {
        const double t = 2.0 * deg2rad(angles_deg[i]);
        const auto r = static_cast<Eigen::Index>(i);
        a(r, 0) = 1.0;
        a(r, 1) = std::cos(t);
        a(r, 2) = std::sin(t);
        y(r) = intensity[i];
    }
    const Eigen::Vector3d c = a.colPivHouseholderQr().solve(y);
    Cos2Fit f;
    f.mean = c(0);
    f.amplitude = std::hypot(c(1), c(2));
    f.phase_deg = rad2deg(0.5 * std::atan2(c(2), c(1)));
    return f;
}

struct PolarizationAnalysis {
    Cos2Fit peak2, peak3, circle;
    double measured_ratio = 0.0; // peak2 : peak3 mean intensity
    double equivalent_ratio = 0.0;
    double theta_deg = 0.0;
    double beta_deg = 0.0;
};

// Full chain from polar-plot samples: the peak-2 trace is divided by the
// thermal ratio so the sum behaves as an equal-strength dipole circle, whose
// extrema give theta; the mean-intensity ratio gives beta.
inline PolarizationAnalysis analyze_polarization(std::span<const PolarizationSample> samples, double thermal) {
    std::vector<double> ang, p2, p3, circ;
    for (const auto& s : samples) {
        ang.push_back(s.angle_deg);
        p2.push_back(s.peak2);
        p3.push_back(s.peak3);
        circ.push_back(s.peak2 / thermal + s.peak3);
    }
    PolarizationAnalysis out;
    out.peak2 = fit_cos2(ang, p2);
    out.peak3 = fit_cos2(ang, p3);
    out.circle = fit_cos2(ang, circ);
    if (!(out.peak3.mean > 0.0)) throw DegenerateError("analyze_polarization: peak 3 has no intensity");
    out.measured_ratio = out.peak2.mean / out.peak3.mean;
    out.equivalent_ratio = equivalent_circle_ratio(out.measured_ratio, thermal);
    out.theta_deg = polar_from_extrema(std::max(0.0, out.circle.i_min()), out.circle.i_max());
    out.beta_deg = solve_beta(out.theta_deg, out.equivalent_ratio);
    return out;
}

// Forward model: polar-plot intensities for peaks 2 and 3 of a dipole pair,
// peak 2 scaled by the thermal ratio.
inline PolarizationSample simulate_polarization(double theta_deg, double beta_deg, double thermal, double angle_deg) {
    const Eigen::Matrix3d a = rotation_matrix(theta_deg, beta_deg);
    const Eigen::Vector3d x = a * Eigen::Vector3d::UnitX();
    const Eigen::Vector3d y = a * Eigen::Vector3d::UnitY();
    const double c = std::cos(deg2rad(angle_deg)), s = std::sin(deg2rad(angle_deg));
    return {angle_deg, thermal * std::pow(x(0) * c + x(1) * s, 2), std::pow(y(0) * c + y(1) * s, 2)};
}

} // namespace zplcav
