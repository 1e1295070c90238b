#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "zplcav/cavity.hpp"
#include "zplcav/errors.hpp"
#include "zplcav/spectrum.hpp"

namespace zplcav {

// Single cavity mode seen as a Lorentzian filter.
struct ModeFilter {
    double lambda_cav = 0.0; // nm
    double q_factor = 0.0;
    double f_max = 0.0;

    double fwhm() const { return lambda_cav / q_factor; }
    // 1 / (1 + 4 Q^2 (lambda/lambda_cav - 1)^2)
    double shape(double lambda) const {
        const double x = lambda / lambda_cav - 1.0;
        return 1.0 / (1.0 + 4.0 * q_factor * q_factor * x * x);
    }
};

inline void validate(const ModeFilter& f) {
    if (!(f.lambda_cav > 0.0 && f.q_factor > 0.0 && f.f_max >= 0.0))
        throw DomainError("ModeFilter: lambda_cav and q_factor must be > 0, f_max >= 0");
}

inline double lorentzian_enhancement(double lambda, const ModeFilter& f, double xi) {
    validate(f);
    return xi * f.f_max * f.shape(lambda);
}

inline double q_eff(double lambda, double fwhm_cavity, double fwhm_emitter) {
    if (!(fwhm_cavity > 0.0) || !(fwhm_emitter >= 0.0))
        throw DomainError("q_eff: cavity width must be > 0 and emitter width >= 0");
    return lambda / (fwhm_cavity + fwhm_emitter);
}

inline double peak_enhancement(double f_zpl, double dw, double branching) {
    if (!(dw * branching > 0.0)) throw DomainError("peak_enhancement: dw * branching must be > 0");
    return f_zpl / (dw * branching);
}

// f_zpl + (1 - DW) f_psb
inline double total_rate(double f_zpl, double f_psb, double dw) {
    if (!(f_zpl >= 0.0 && f_psb >= 0.0)) throw DomainError("total_rate: rates must be >= 0");
    if (!(dw >= 0.0 && dw < 1.0)) throw DomainError("total_rate: dw must lie in [0, 1)");
    return f_zpl + (1.0 - dw) * f_psb;
}

struct CouplingResult {
    double f_zpl = 0.0;
    double f_psb = 0.0;
    double f_total = 0.0;
    std::vector<double> per_peak_enhancement; // f_zpl / (DW n_mu)
    std::vector<double> per_dipole_f_zpl;     // contribution of each dipole
};

// ZPL coupling of one emitter to one cavity mode on a fixed wavelength grid.
// The per-dipole spectra S_mu (own ZPL peak carrying DW plus the shared
// sideband) and the axial spectrum are computed once and reused for any
// number of filters.
class ZplCoupling {
public:
    ZplCoupling(const EmitterModel& model, std::vector<double> xi, std::span<const double> grid)
        : grid_(grid.begin(), grid.end()), xi_(std::move(xi)), dw_(model.debye_waller()) {
        const auto& peaks = model.zpl_peaks();
        if (xi_.size() != peaks.size())
            throw ConfigurationError("ZplCoupling: " + std::to_string(xi_.size()) + " overlap factors for " +
                                     std::to_string(peaks.size()) + " ZPL peaks");
        for (double x : xi_)
            if (!(x >= 0.0 && x <= 1.0)) throw DomainError("ZplCoupling: overlap factors must lie in [0, 1]");
        n_ = model.branching();

        const auto full = synthesize_spectrum(model, grid_); // validates coverage and resolution
        const auto psb = synthesize_psb(model, grid_);
        weight_sum_ = 0.0;
        for (std::size_t k = 0; k < peaks.size(); ++k) weight_sum_ += n_[k] * xi_[k];

        axial_.assign(grid_.size(), 0.0);
        per_dipole_.resize(peaks.size());
        for (std::size_t k = 0; k < peaks.size(); ++k) {
            auto& s = per_dipole_[k];
            s.assign(psb.density().begin(), psb.density().end());
            if (peaks[k].weight > 0.0) {
                GaussianPeak unit = peaks[k];
                unit.weight = dw_;
                for (std::size_t i = 0; i < grid_.size(); ++i) s[i] += unit(grid_[i]);
            }
            if (weight_sum_ > 0.0)
                for (std::size_t i = 0; i < grid_.size(); ++i) axial_[i] += n_[k] * xi_[k] * s[i] / weight_sum_;
        }
        if (!(weight_sum_ > 0.0)) axial_.assign(full.density().begin(), full.density().end());
    }

    std::span<const double> grid() const { return grid_; }
    const std::vector<double>& branching() const { return n_; }
    const std::vector<double>& overlap() const { return xi_; }
    double weight_sum() const { return weight_sum_; }
    double debye_waller() const { return dw_; }

    SampledSpectrum s_axial() const { return {grid_, axial_}; }

    // Factorized form: F_max [sum n xi] integral S_axial L.
    double f_zpl(const ModeFilter& f) const {
        check_filter(f);
        return f.f_max * weight_sum_ * filtered_integral(axial_, f);
    }

    // Per-dipole sum: sum_mu n_mu integral S_mu xi_mu F_max L.
    double f_zpl_per_dipole(const ModeFilter& f) const {
        double total = 0.0;
        for (double c : per_dipole_contributions(f)) total += c;
        return total;
    }

    std::vector<double> per_dipole_contributions(const ModeFilter& f) const {
        check_filter(f);
        std::vector<double> out;
        for (std::size_t k = 0; k < per_dipole_.size(); ++k)
            out.push_back(n_[k] * xi_[k] * f.f_max * filtered_integral(per_dipole_[k], f));
        return out;
    }

    // S_axial * L. When `normalize` the result has unit integral.
    SampledSpectrum cavity_spectrum(const ModeFilter& f, bool normalize = true) const {
        check_filter(f);
        std::vector<double> d(grid_.size());
        for (std::size_t i = 0; i < grid_.size(); ++i) d[i] = axial_[i] * f.shape(grid_[i]);
        SampledSpectrum s(grid_, std::move(d));
        return normalize ? s.normalized() : s;
    }

private:
    void check_filter(const ModeFilter& f) const {
        validate(f);
        const double w = f.fwhm();
        if (f.lambda_cav - w < grid_.front() || f.lambda_cav + w > grid_.back())
            throw DomainError("ZplCoupling: cavity line outside the working grid");
        if (detail::max_spacing_in(grid_, f.lambda_cav - w, f.lambda_cav + w) > w / 8.0 * (1.0 + 1e-9))
            throw ResolutionError("ZplCoupling: grid resolves the cavity line with fewer than 8 samples per fwhm");
    }

    double filtered_integral(const std::vector<double>& s, const ModeFilter& f) const {
        double sum = 0.0;
        double prev = s[0] * f.shape(grid_[0]);
        for (std::size_t i = 1; i < grid_.size(); ++i) {
            const double cur = s[i] * f.shape(grid_[i]);
            sum += 0.5 * (prev + cur) * (grid_[i] - grid_[i - 1]);
            prev = cur;
        }
        return sum;
    }

    std::vector<double> grid_;
    std::vector<double> xi_;
    std::vector<double> n_;
    double dw_;
    double weight_sum_ = 0.0;
    std::vector<double> axial_;
    std::vector<std::vector<double>> per_dipole_;
};

inline SampledSpectrum s_axial(const EmitterModel& model, std::vector<double> xi, std::span<const double> grid) {
    return ZplCoupling(model, std::move(xi), grid).s_axial();
}

inline double f_zpl(const EmitterModel& model, std::vector<double> xi, const ModeFilter& f,
                    std::span<const double> grid) {
    return ZplCoupling(model, std::move(xi), grid).f_zpl(f);
}

inline SampledSpectrum cavity_spectrum(const EmitterModel& model, std::vector<double> xi, const ModeFilter& f,
                                       std::span<const double> grid) {
    return ZplCoupling(model, std::move(xi), grid).cavity_spectrum(f);
}

struct TuningScan {
    std::vector<double> lambda_cav;
    std::vector<SampledSpectrum> spectra; // normalized cavity spectra
    std::vector<double> f_zpl;
};

// One cavity spectrum and one F_ZPL per filter position; filters must be
// ordered by lambda_cav.
inline TuningScan tuning_scan(const ZplCoupling& c, std::span<const ModeFilter> filters) {
    for (std::size_t i = 1; i < filters.size(); ++i)
        if (!(filters[i].lambda_cav > filters[i - 1].lambda_cav))
            throw DomainError("tuning_scan: lambda_cav must be strictly increasing");
    TuningScan out;
    for (const auto& f : filters) {
        out.lambda_cav.push_back(f.lambda_cav);
        out.spectra.push_back(c.cavity_spectrum(f));
        out.f_zpl.push_back(c.f_zpl(f));
    }
    return out;
}

// Filters at `pitch` spacing across `range` sharing Q and F_max. F_max is
// rescaled with lambda^3 when `reference_lambda` > 0.
inline std::vector<ModeFilter> filter_sweep(Window range, double pitch, double q_factor, double f_max_value,
                                            double reference_lambda = 0.0) {
    std::vector<ModeFilter> out;
    for (double l : uniform_grid(range.lo, range.hi, pitch)) {
        double fm = f_max_value;
        if (reference_lambda > 0.0) fm *= std::pow(l / reference_lambda, 3);
        out.push_back({l, q_factor, fm});
    }
    return out;
}

struct OptimalTuning {
    double lambda_cav = 0.0;
    double f_zpl = 0.0;
};

// lambda_cav maximizing F_ZPL over a scan of `range` at `pitch`.
inline OptimalTuning optimal_tuning(const ZplCoupling& c, Window range, double q_factor, double f_max_value,
                                    double pitch = 0.01) {
    OptimalTuning best{range.lo, -1.0};
    for (const auto& f : filter_sweep(range, pitch, q_factor, f_max_value)) {
        const double v = c.f_zpl(f);
        if (v > best.f_zpl) best = {f.lambda_cav, v};
    }
    return best;
}

inline CouplingResult compose_coupling(const ZplCoupling& c, const ModeFilter& f, double f_psb) {
    CouplingResult r;
    r.per_dipole_f_zpl = c.per_dipole_contributions(f);
    r.f_zpl = c.f_zpl(f);
    r.f_psb = f_psb;
    r.f_total = total_rate(r.f_zpl, f_psb, c.debye_waller());
    for (double n : c.branching())
        r.per_peak_enhancement.push_back(n > 0.0 ? peak_enhancement(r.f_zpl, c.debye_waller(), n) : 0.0);
    return r;
}

// Crude multimode sideband factor: a background floor plus the on-axis bright
// modes (both transverse indices even) as Lorentzian filters, averaged over
// the sideband spectrum. The floor is chosen so a spectrally flat emitter
// over the sideband domain sees an average factor of exactly 1.
inline double estimate_f_psb(const SampledSpectrum& psb, std::span<const CavityMode> modes, double xi,
                             double medium_index = 1.0) {
    const auto wl = psb.wavelengths();
    std::vector<double> sum(wl.size(), 0.0);
    for (const auto& m : modes) {
        if (m.dark_on_axis) continue;
        if (!(m.linewidth_fwhm_nm > 0.0)) throw DomainError("estimate_f_psb: mode linewidth unresolved");
        const ModeFilter f{m.wavelength_nm, m.quality_factor(),
                           f_max(m.wavelength_nm, medium_index, m.quality_factor(), m.mode_volume_um3)};
        for (std::size_t i = 0; i < wl.size(); ++i) sum[i] += xi * f.f_max * f.shape(wl[i]);
    }
    const SampledSpectrum modes_only(std::vector<double>(wl.begin(), wl.end()), sum);
    const double flat_mean = modes_only.integral() / (wl.back() - wl.front());
    const double floor = std::max(0.0, 1.0 - flat_mean);
    std::vector<double> weighted(wl.size());
    for (std::size_t i = 0; i < wl.size(); ++i) weighted[i] = psb.density()[i] * sum[i];
    const double norm = psb.integral();
    if (!(norm > 0.0)) throw DegenerateError("estimate_f_psb: empty sideband");
    return floor + SampledSpectrum(std::vector<double>(wl.begin(), wl.end()), weighted).integral() / norm;
}

} // namespace zplcav
