#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "zplcav/least_squares.hpp"
#include "zplcav/spectrum.hpp"

namespace zplcav {

struct PeakFit {
    std::vector<GaussianPeak> peaks;
    std::vector<GaussianPeak> standard_errors;
    double residual_norm = 0.0;
    double initial_residual_norm = 0.0;
    int iterations = 0;
    // Set when the requested peak count exceeds what the data resolves.
    bool ill_posed = false;
};

namespace detail {

class GaussianSumModel {
public:
    GaussianSumModel(const SampledSpectrum& s, std::size_t k) : s_(s), k_(k) {}

    Eigen::Index residual_count() const { return static_cast<Eigen::Index>(s_.size()); }

    bool evaluate(const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) const {
        const auto wl = s_.wavelengths();
        const auto d = s_.density();
        r.setZero();
        jac.setZero();
        for (std::size_t j = 0; j < k_; ++j) {
            const double c = p(3 * j), f = p(3 * j + 1), w = p(3 * j + 2);
            if (!(f > 0.0) || !std::isfinite(c) || !std::isfinite(w)) return false;
            const double sigma = f / kFwhmPerSigma;
            const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
            for (std::size_t i = 0; i < wl.size(); ++i) {
                const double z = (wl[i] - c) / sigma;
                const double unit = norm * std::exp(-0.5 * z * z);
                const double g = w * unit;
                const auto row = static_cast<Eigen::Index>(i);
                r(row) += g;
                jac(row, 3 * j) = g * z / sigma;
                jac(row, 3 * j + 1) = g * (z * z - 1.0) / sigma / kFwhmPerSigma;
                jac(row, 3 * j + 2) = unit;
            }
        }
        for (std::size_t i = 0; i < wl.size(); ++i) r(static_cast<Eigen::Index>(i)) -= d[i];
        return true;
    }

private:
    const SampledSpectrum& s_;
    std::size_t k_;
};

} // namespace detail

// Least-squares fit of `init.size()` Gaussian peaks to a sampled spectrum.
inline PeakFit fit_gaussian_peaks(const SampledSpectrum& s, const std::vector<GaussianPeak>& init,
                                  const LmOptions& opt = {}) {
    if (init.empty()) throw DomainError("fit_gaussian_peaks: need at least one peak");
    const Window dom = s.domain();
    for (std::size_t i = 0; i < init.size(); ++i) {
        if (!dom.contains(init[i].center)) throw DomainError("fit_gaussian_peaks: initial center outside grid");
        if (!(init[i].fwhm > 0.0)) throw DomainError("fit_gaussian_peaks: zero-width initial guess");
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(init[i].center - init[j].center) < 1e-12 * std::max(1.0, std::abs(init[i].center)))
                throw DomainError("fit_gaussian_peaks: coincident initial centers");
    }

    Eigen::VectorXd p(static_cast<Eigen::Index>(3 * init.size()));
    for (std::size_t j = 0; j < init.size(); ++j) {
        p(3 * j) = init[j].center;
        p(3 * j + 1) = init[j].fwhm;
        p(3 * j + 2) = init[j].weight;
    }
    const detail::GaussianSumModel model(s, init.size());
    LmResult lm;
    bool stalled = false;
    try {
        lm = levenberg_marquardt(model, p, opt);
    } catch (const ConvergenceError& e) {
        // Redundant peaks leave a flat valley the iteration never leaves.
        stalled = true;
        lm.parameters = Eigen::Map<const Eigen::VectorXd>(e.best_parameters.data(), p.size());
        lm.standard_errors = Eigen::VectorXd::Constant(p.size(), std::numeric_limits<double>::quiet_NaN());
        lm.residual_norm = e.residual;
        lm.iterations = opt.max_iterations;
        Eigen::VectorXd r(model.residual_count());
        Eigen::MatrixXd j(model.residual_count(), p.size());
        model.evaluate(p, r, j);
        lm.initial_residual_norm = r.norm();
    }

    PeakFit fit;
    fit.residual_norm = lm.residual_norm;
    fit.initial_residual_norm = lm.initial_residual_norm;
    fit.iterations = lm.iterations;
    for (std::size_t j = 0; j < init.size(); ++j) {
        fit.peaks.push_back({lm.parameters(3 * j), lm.parameters(3 * j + 1), lm.parameters(3 * j + 2)});
        fit.standard_errors.push_back(
            {lm.standard_errors(3 * j), lm.standard_errors(3 * j + 1), lm.standard_errors(3 * j + 2)});
    }
    // Unresolvable: centers closer than half the narrower width, a vanished
    // peak, or a numerically singular normal matrix.
    double wmax = 0.0;
    for (const auto& pk : fit.peaks) wmax = std::max(wmax, std::abs(pk.weight));
    for (std::size_t i = 0; i < fit.peaks.size(); ++i) {
        if (std::abs(fit.peaks[i].weight) <= 1e-9 * wmax) fit.ill_posed = true;
        for (std::size_t j = 0; j < i; ++j) {
            const double sep = std::abs(fit.peaks[i].center - fit.peaks[j].center);
            if (sep < 0.5 * std::min(fit.peaks[i].fwhm, fit.peaks[j].fwhm)) fit.ill_posed = true;
        }
    }
    if (stalled || (lm.iterations > 0 && lm.reciprocal_condition < 1e-14)) fit.ill_posed = true;
    return fit;
}

} // namespace zplcav
