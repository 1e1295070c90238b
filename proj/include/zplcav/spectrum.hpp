#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "zplcav/errors.hpp"

namespace zplcav {

// Photon energy/wavelength conversion, eV·nm.
inline constexpr double kHcEvNm = 1239.841984;
// FWHM = kFwhmPerSigma * sigma for a Gaussian.
inline constexpr double kFwhmPerSigma = 2.3548200450309493;

inline double wavelength_to_ev(double nm) { return kHcEvNm / nm; }
inline double ev_to_wavelength(double ev) { return kHcEvNm / ev; }

// Wavelength interval [lo, hi] in nm.
struct Window {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
    bool overlaps(const Window& o) const { return lo < o.hi && o.lo < hi; }
};

inline std::vector<double> uniform_grid(double lo, double hi, double step) {
    if (!(hi > lo) || !(step > 0.0)) throw DomainError("uniform_grid: need lo < hi and step > 0");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + step * static_cast<double>(i);
    if (hi - g.back() > 1e-9 * step) g.push_back(hi);
    return g;
}

inline void check_grid(std::span<const double> grid, const char* who) {
    if (grid.size() < 2) throw DomainError(std::string(who) + ": grid needs at least 2 points");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i])) throw DomainError(std::string(who) + ": non-finite grid value");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw DomainError(std::string(who) + ": grid must be strictly increasing");
    }
}

// Wavelength grid plus non-negative spectral density (per nm).
class SampledSpectrum {
public:
    SampledSpectrum(std::vector<double> wavelengths, std::vector<double> density)
        : wl_(std::move(wavelengths)), density_(std::move(density)) {
        check_grid(wl_, "SampledSpectrum");
        if (density_.size() != wl_.size())
            throw DomainError("SampledSpectrum: density and wavelength lengths differ");
        for (double d : density_)
            if (!std::isfinite(d) || d < 0.0)
                throw DomainError("SampledSpectrum: density must be finite and >= 0");
    }

    std::span<const double> wavelengths() const { return wl_; }
    std::span<const double> density() const { return density_; }
    std::size_t size() const { return wl_.size(); }
    Window domain() const { return {wl_.front(), wl_.back()}; }

    // Linear interpolation; zero outside the grid.
    double at(double lambda) const {
        if (lambda < wl_.front() || lambda > wl_.back()) return 0.0;
        auto it = std::upper_bound(wl_.begin(), wl_.end(), lambda);
        if (it == wl_.end()) return density_.back();
        const auto i = static_cast<std::size_t>(it - wl_.begin());
        const double t = (lambda - wl_[i - 1]) / (wl_[i] - wl_[i - 1]);
        return density_[i - 1] + t * (density_[i] - density_[i - 1]);
    }

    double integral() const {
        double s = 0.0;
        for (std::size_t i = 1; i < wl_.size(); ++i)
            s += 0.5 * (density_[i] + density_[i - 1]) * (wl_[i] - wl_[i - 1]);
        return s;
    }

    SampledSpectrum scaled(double factor) const {
        if (!(factor >= 0.0)) throw DomainError("SampledSpectrum::scaled: negative factor");
        auto d = density_;
        for (auto& v : d) v *= factor;
        return {wl_, std::move(d)};
    }

    SampledSpectrum normalized() const {
        const double s = integral();
        if (!(s > 0.0)) throw DegenerateError("SampledSpectrum::normalized: zero integral");
        return scaled(1.0 / s);
    }

private:
    std::vector<double> wl_;
    std::vector<double> density_;
};

// Trapezoidal integral of the density over [lo, hi], with linear interpolation
// at the band edges.
inline double integrate_band(const SampledSpectrum& s, double lo, double hi) {
    if (!(lo < hi)) throw DomainError("integrate_band: need lo < hi");
    const auto wl = s.wavelengths();
    const auto d = s.density();
    if (lo < wl.front() || hi > wl.back()) throw DomainError("integrate_band: band outside grid");
    double sum = 0.0;
    double prev_x = lo;
    double prev_y = s.at(lo);
    auto it = std::upper_bound(wl.begin(), wl.end(), lo);
    for (; it != wl.end() && *it < hi; ++it) {
        const auto i = static_cast<std::size_t>(it - wl.begin());
        sum += 0.5 * (d[i] + prev_y) * (wl[i] - prev_x);
        prev_x = wl[i];
        prev_y = d[i];
    }
    sum += 0.5 * (s.at(hi) + prev_y) * (hi - prev_x);
    return sum;
}

struct GaussianPeak {
    double center = 0.0; // nm
    double fwhm = 0.0;   // nm
    double weight = 0.0; // analytic area

    double sigma() const { return fwhm / kFwhmPerSigma; }
    double operator()(double lambda) const {
        const double s = sigma();
        const double z = (lambda - center) / s;
        return weight * std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi));
    }
    // Support used for grid-coverage checks.
    Window support() const { return {center - 3.0 * fwhm, center + 3.0 * fwhm}; }
};

// Phonon sideband as a tabulated shape; rescaled to the required weight on use.
struct TabulatedPsb {
    SampledSpectrum shape;
};

// Phonon sideband as a sum of Gaussian replicas.
struct ReplicaPsb {
    std::vector<GaussianPeak> replicas;
};

using PhononSideband = std::variant<TabulatedPsb, ReplicaPsb>;

// Fallback sideband: `count` Gaussian replicas spaced `spacing_mev` below the
// ZPL, widths doubling per replica, Poisson-weighted with Huang-Rhys factor
// -ln(DW) and rescaled so the total weight is 1 - DW.
inline ReplicaPsb phonon_replicas(double zpl_center_nm, double debye_waller, int count = 4,
                                  double spacing_mev = 65.0, double first_fwhm_nm = 4.0) {
    if (!(debye_waller > 0.0 && debye_waller <= 1.0))
        throw DomainError("phonon_replicas: Debye-Waller factor must be in (0, 1]");
    if (count < 1) throw DomainError("phonon_replicas: need at least one replica");
    ReplicaPsb psb;
    if (debye_waller == 1.0) return psb;
    const double huang_rhys = -std::log(debye_waller);
    const double e0 = wavelength_to_ev(zpl_center_nm);
    double total = 0.0;
    double poisson = 1.0;
    double fwhm = first_fwhm_nm;
    for (int k = 1; k <= count; ++k) {
        poisson *= huang_rhys / k;
        const double center = ev_to_wavelength(e0 - 1e-3 * spacing_mev * k);
        psb.replicas.push_back({center, fwhm, poisson});
        total += poisson;
        fwhm *= 2.0;
    }
    for (auto& r : psb.replicas) r.weight *= (1.0 - debye_waller) / total;
    return psb;
}

class EmitterModel {
public:
    EmitterModel(std::vector<GaussianPeak> zpl_peaks, PhononSideband psb, double debye_waller,
                 Window zpl_window)
        : zpl_(std::move(zpl_peaks)), psb_(std::move(psb)), dw_(debye_waller), window_(zpl_window) {
        if (zpl_.empty()) throw DomainError("EmitterModel: at least one ZPL peak required");
        if (!(dw_ > 0.0 && dw_ <= 1.0)) throw DomainError("EmitterModel: debye_waller must be in (0, 1]");
        double w = 0.0;
        for (const auto& p : zpl_) {
            if (!(p.fwhm > 0.0)) throw DomainError("EmitterModel: peak fwhm must be > 0");
            if (!(p.weight >= 0.0)) throw DomainError("EmitterModel: peak weight must be >= 0");
            if (!window_.contains(p.center))
                throw DomainError("EmitterModel: ZPL peak center outside the ZPL window");
            w += p.weight;
        }
        if (std::abs(w - dw_) > 1e-9)
            throw DomainError("EmitterModel: ZPL peak weights must sum to debye_waller");
        if (const auto* r = std::get_if<ReplicaPsb>(&psb_)) {
            double t = 0.0;
            for (const auto& p : r->replicas) {
                if (!(p.fwhm > 0.0)) throw DomainError("EmitterModel: replica fwhm must be > 0");
                t += p.weight;
            }
            if (std::abs(t - (1.0 - dw_)) > 1e-9)
                throw DomainError("EmitterModel: PSB weight must equal 1 - debye_waller");
        } else if (dw_ < 1.0 && !(std::get<TabulatedPsb>(psb_).shape.integral() > 0.0)) {
            throw DomainError("EmitterModel: tabulated PSB has zero integral");
        }
    }

    const std::vector<GaussianPeak>& zpl_peaks() const { return zpl_; }
    const PhononSideband& psb() const { return psb_; }
    double debye_waller() const { return dw_; }
    Window zpl_window() const { return window_; }

    // Branching factor of each ZPL peak (its share of the ZPL weight).
    std::vector<double> branching() const {
        std::vector<double> n;
        for (const auto& p : zpl_) n.push_back(p.weight / dw_);
        return n;
    }

    // Extent of the sideband; nullopt when there is none.
    std::optional<Window> psb_support() const {
        if (dw_ == 1.0) return std::nullopt;
        if (const auto* r = std::get_if<ReplicaPsb>(&psb_)) {
            if (r->replicas.empty()) return std::nullopt;
            Window w = r->replicas.front().support();
            for (const auto& p : r->replicas) {
                w.lo = std::min(w.lo, p.support().lo);
                w.hi = std::max(w.hi, p.support().hi);
            }
            return w;
        }
        const auto& s = std::get<TabulatedPsb>(psb_).shape;
        const auto wl = s.wavelengths();
        const auto d = s.density();
        std::size_t first = 0, last = d.size() - 1;
        while (first < d.size() && d[first] <= 0.0) ++first;
        while (last > first && d[last] <= 0.0) --last;
        if (first == d.size()) return std::nullopt;
        return Window{wl[first], wl[last]};
    }

    // All Gaussian components with their weights (ZPL first, then replicas).
    std::vector<GaussianPeak> gaussian_components() const {
        auto out = zpl_;
        if (const auto* r = std::get_if<ReplicaPsb>(&psb_))
            out.insert(out.end(), r->replicas.begin(), r->replicas.end());
        return out;
    }

    // Copy with every ZPL weight rescaled so they sum to `dw`, PSB adjusted.
    EmitterModel with_debye_waller(double dw) const {
        auto peaks = zpl_;
        for (auto& p : peaks) p.weight *= dw / dw_;
        PhononSideband psb = psb_;
        if (auto* r = std::get_if<ReplicaPsb>(&psb)) {
            const double old = 1.0 - dw_;
            for (auto& p : r->replicas) p.weight = old > 0.0 ? p.weight * (1.0 - dw) / old : 0.0;
        }
        return {std::move(peaks), std::move(psb), dw, window_};
    }

private:
    std::vector<GaussianPeak> zpl_;
    PhononSideband psb_;
    double dw_;
    Window window_;
};

namespace detail {

inline double max_spacing_in(std::span<const double> grid, double lo, double hi) {
    double m = 0.0;
    auto it = std::lower_bound(grid.begin(), grid.end(), lo);
    if (it != grid.begin()) --it;
    for (; it + 1 != grid.end() && *it < hi; ++it) m = std::max(m, *(it + 1) - *it);
    return m;
}

inline void check_component(std::span<const double> grid, const GaussianPeak& p) {
    if (p.center < grid.front() || p.center > grid.back())
        throw DomainError("synthesize_spectrum: grid does not cover peak center " + std::to_string(p.center));
    const Window s = p.support();
    if (s.lo < grid.front() || s.hi > grid.back())
        throw DomainError("synthesize_spectrum: grid does not span 3 fwhm around peak at " +
                          std::to_string(p.center));
    if (max_spacing_in(grid, p.center - p.fwhm, p.center + p.fwhm) > p.fwhm / 8.0 * (1.0 + 1e-9))
        throw ResolutionError("synthesize_spectrum: fewer than 8 samples per fwhm for peak at " +
                              std::to_string(p.center));
}

} // namespace detail

// Weighted sum of Gaussian peaks on `grid`, no renormalization (linear in the
// peak list).
inline SampledSpectrum synthesize_peaks(std::span<const GaussianPeak> peaks, std::span<const double> grid) {
    check_grid(grid, "synthesize_peaks");
    std::vector<double> d(grid.size(), 0.0);
    for (const auto& p : peaks) {
        if (!(p.fwhm > 0.0)) throw DomainError("synthesize_peaks: fwhm must be > 0");
        for (std::size_t i = 0; i < grid.size(); ++i) d[i] += p(grid[i]);
    }
    return {std::vector<double>(grid.begin(), grid.end()), std::move(d)};
}

// Sideband alone on `grid`, carrying weight 1 - DW.
inline SampledSpectrum synthesize_psb(const EmitterModel& model, std::span<const double> grid) {
    check_grid(grid, "synthesize_psb");
    if (const auto* r = std::get_if<ReplicaPsb>(&model.psb())) {
        for (const auto& p : r->replicas) detail::check_component(grid, p);
        return synthesize_peaks(r->replicas, grid);
    }
    std::vector<double> d(grid.size(), 0.0);
    const double target = 1.0 - model.debye_waller();
    if (target > 0.0) {
        const auto& shape = std::get<TabulatedPsb>(model.psb()).shape;
        for (std::size_t i = 0; i < grid.size(); ++i) d[i] = shape.at(grid[i]);
        SampledSpectrum tmp(std::vector<double>(grid.begin(), grid.end()), d);
        const double s = tmp.integral();
        if (!(s > 0.0)) throw DomainError("synthesize_psb: tabulated PSB does not overlap the grid");
        for (auto& v : d) v *= target / s;
    }
    return {std::vector<double>(grid.begin(), grid.end()), std::move(d)};
}

// Normalized emitter spectrum: ZPL peaks plus sideband.
inline SampledSpectrum synthesize_spectrum(const EmitterModel& model, std::span<const double> grid) {
    check_grid(grid, "synthesize_spectrum");
    for (const auto& p : model.zpl_peaks()) detail::check_component(grid, p);
    const auto zpl = synthesize_peaks(model.zpl_peaks(), grid);
    const auto psb = synthesize_psb(model, grid);
    std::vector<double> d(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) d[i] = zpl.density()[i] + psb.density()[i];
    return {std::vector<double>(grid.begin(), grid.end()), std::move(d)};
}

// Fraction of emission inside the ZPL window. Refuses windows that overlap the
// sideband since the split would then be ambiguous.
inline double debye_waller(const SampledSpectrum& s, Window zpl_window,
                           std::optional<Window> psb_support = std::nullopt) {
    if (psb_support && zpl_window.overlaps(*psb_support))
        throw AmbiguityError("debye_waller: ZPL window overlaps the phonon sideband support");
    return integrate_band(s, zpl_window.lo, zpl_window.hi);
}

} // namespace zplcav
