#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "zplcav/errors.hpp"
#include "zplcav/least_squares.hpp"

namespace zplcav {

struct DataPoint {
    double x = 0.0;
    double y = 0.0;
};

// I = I_sat P / (P_sat + P)
struct SaturationFit {
    double i_sat = 0.0; // counts/s
    double p_sat = 0.0; // mW
    double i_sat_error = 0.0;
    double p_sat_error = 0.0;
    double residual = 0.0; // rms, counts/s
    int iterations = 0;
};

inline double saturation_model(double power, double i_sat, double p_sat) { return i_sat * power / (p_sat + power); }

namespace detail {

class SaturationModel {
public:
    explicit SaturationModel(std::span<const DataPoint> d) : d_(d) {}
    Eigen::Index residual_count() const { return static_cast<Eigen::Index>(d_.size()); }
    bool evaluate(const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& j) const {
        const double is = p(0), ps = p(1);
        if (!(is > 0.0 && ps > 0.0)) return false;
        for (std::size_t k = 0; k < d_.size(); ++k) {
            const auto i = static_cast<Eigen::Index>(k);
            const double x = d_[k].x, den = ps + x;
            r(i) = is * x / den - d_[k].y;
            j(i, 0) = x / den;
            j(i, 1) = -is * x / (den * den);
        }
        return true;
    }

private:
    std::span<const DataPoint> d_;
};

class ExponentialModel {
public:
    ExponentialModel(std::span<const DataPoint> d, bool baseline) : d_(d), baseline_(baseline) {}
    Eigen::Index residual_count() const { return static_cast<Eigen::Index>(d_.size()); }
    bool evaluate(const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& j) const {
        const double a = p(0), tau = p(1), b = baseline_ ? p(2) : 0.0;
        if (!(tau > 0.0)) return false;
        for (std::size_t k = 0; k < d_.size(); ++k) {
            const auto i = static_cast<Eigen::Index>(k);
            const double e = std::exp(-d_[k].x / tau);
            r(i) = a * e + b - d_[k].y;
            j(i, 0) = e;
            j(i, 1) = a * e * d_[k].x / (tau * tau);
            if (baseline_) j(i, 2) = 1.0;
        }
        return true;
    }

private:
    std::span<const DataPoint> d_;
    bool baseline_;
};

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double rms(const SaturationFit& f, std::span<const DataPoint> d) {
    double s = 0.0;
    for (const auto& p : d) s += std::pow(saturation_model(p.x, f.i_sat, f.p_sat) - p.y, 2);
    return std::sqrt(s / static_cast<double>(d.size()));
}

} // namespace detail

// Points are (power mW, counts/s).
inline SaturationFit fit_saturation(std::span<const DataPoint> data, const LmOptions& opt = {}) {
    if (data.size() < 3) throw DomainError("fit_saturation: need at least 3 points");
    std::vector<double> powers, counts;
    for (const auto& p : data) {
        if (!(p.x > 0.0)) throw DomainError("fit_saturation: powers must be > 0");
        powers.push_back(p.x);
        counts.push_back(p.y);
    }
    auto sorted = powers;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw DomainError("fit_saturation: powers must be distinct");
    if (std::all_of(counts.begin(), counts.end(), [](double c) { return c == 0.0; }))
        throw DegenerateError("fit_saturation: all intensities are zero");

    Eigen::VectorXd start(2);
    start << *std::max_element(counts.begin(), counts.end()), detail::median(powers);
    const auto r = levenberg_marquardt(detail::SaturationModel(data), start, opt);
    SaturationFit f;
    f.i_sat = r.parameters(0);
    f.p_sat = r.parameters(1);
    f.i_sat_error = r.standard_errors(0);
    f.p_sat_error = r.standard_errors(1);
    f.residual = detail::rms(f, data);
    f.iterations = r.iterations;
    return f;
}

// Local-optimality check: no point on an n x n grid spanning +-`span`
// (relative) around the fit has a smaller rms residual.
inline bool saturation_locally_optimal(const SaturationFit& f, std::span<const DataPoint> data, int n = 50,
                                       double span = 0.1) {
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            SaturationFit g = f;
            g.i_sat = f.i_sat * (1.0 - span + 2.0 * span * a / (n - 1));
            g.p_sat = f.p_sat * (1.0 - span + 2.0 * span * b / (n - 1));
            if (detail::rms(g, data) < f.residual * (1.0 - 1e-12)) return false;
        }
    return true;
}

// I = A exp(-t / tau) (+ baseline)
struct DecayFit {
    double tau = 0.0; // ns
    double amplitude = 0.0;
    double baseline = 0.0;
    double tau_error = 0.0;
    double amplitude_error = 0.0;
    double baseline_error = 0.0;
    double residual = 0.0; // rms
    int iterations = 0;
};

// Points are (t ns, counts). tau starts from a log-linear regression over the
// first half of the positive samples.
inline DecayFit fit_exponential(std::span<const DataPoint> data, bool with_baseline, const LmOptions& opt = {}) {
    if (data.size() < 4) throw DomainError("fit_exponential: need at least 4 points");
    for (std::size_t i = 1; i < data.size(); ++i)
        if (!(data[i].x > data[i - 1].x)) throw DomainError("fit_exponential: times must be ascending");

    std::vector<DataPoint> upper;
    for (std::size_t i = 0; i < (data.size() + 1) / 2; ++i)
        if (data[i].y > 0.0) upper.push_back({data[i].x, std::log(data[i].y)});
    double tau0 = 0.5 * (data.back().x - data.front().x);
    double a0 = std::max_element(data.begin(), data.end(), [](auto& l, auto& r) { return l.y < r.y; })->y;
    if (upper.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const auto& p : upper) {
            sx += p.x; sy += p.y; sxx += p.x * p.x; sxy += p.x * p.y;
        }
        const double n = static_cast<double>(upper.size());
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        if (slope < 0.0 && std::isfinite(slope)) {
            tau0 = -1.0 / slope;
            a0 = std::exp((sy - slope * sx) / n);
        }
    }
    if (!(tau0 > 0.0)) throw DomainError("fit_exponential: cannot initialize tau");

    Eigen::VectorXd start(with_baseline ? 3 : 2);
    start(0) = a0;
    start(1) = tau0;
    if (with_baseline) start(2) = 0.0;
    const auto r = levenberg_marquardt(detail::ExponentialModel(data, with_baseline), start, opt);
    DecayFit f;
    f.amplitude = r.parameters(0);
    f.tau = r.parameters(1);
    f.amplitude_error = r.standard_errors(0);
    f.tau_error = r.standard_errors(1);
    if (with_baseline) {
        f.baseline = r.parameters(2);
        f.baseline_error = r.standard_errors(2);
    }
    if (!(f.tau > 0.0)) throw ConvergenceError("fit_exponential: non-positive lifetime", {f.amplitude, f.tau}, 0.0);
    f.residual = r.residual_norm / std::sqrt(static_cast<double>(data.size()));
    f.iterations = r.iterations;
    return f;
}

// Emission-rate increase in percent when the lifetime drops from tau_out to tau_in.
inline double rate_change(double tau_out_ns, double tau_in_ns) {
    if (!(tau_out_ns > 0.0 && tau_in_ns > 0.0)) throw DomainError("rate_change: lifetimes must be > 0");
    return (tau_out_ns / tau_in_ns - 1.0) * 100.0;
}

struct G2Correction {
    double value = 0.0;
    bool negative = false; // over-subtraction; value is left unclamped
};

// Removes uncorrelated background given the signal fraction rho.
inline G2Correction g2_background_correct(double g2_raw, double rho) {
    if (!(g2_raw >= 0.0)) throw DomainError("g2_background_correct: g2 must be >= 0");
    if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("g2_background_correct: rho must lie in (0, 1]");
    const double r2 = rho * rho;
    G2Correction c;
    c.value = (g2_raw - (1.0 - r2)) / r2;
    c.negative = c.value < 0.0;
    return c;
}

inline double g2_background_uncorrect(double g2_corrected, double rho) {
    if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("g2_background_uncorrect: rho must lie in (0, 1]");
    return rho * rho * g2_corrected + (1.0 - rho * rho);
}

inline double single_emitter_fraction(double g2) {
    if (!(g2 >= 0.0 && g2 <= 1.0)) throw DomainError("single_emitter_fraction: g2 must lie in [0, 1]");
    return std::sqrt(1.0 - g2);
}

} // namespace zplcav
