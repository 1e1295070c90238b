#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <vector>

#include "zplcav/cavity.hpp"
#include "zplcav/config.hpp"
#include "zplcav/dbr.hpp"
#include "zplcav/dipole.hpp"
#include "zplcav/io.hpp"
#include "zplcav/purcell.hpp"
#include "zplcav/spectrum.hpp"

namespace zplcav {

inline LayerStack build_stack(const StackConfig& s) {
    std::vector<Layer> cap;
    for (const auto& l : s.extra_layers)
        cap.push_back(l.thickness_nm ? Layer{l.index, *l.thickness_nm} : quarter_wave(l.index, s.lambda0_nm));
    if (s.count) return quarter_wave_stack(s.n_high, s.n_low, *s.count, s.lambda0_nm, s.ambient, s.substrate, cap);
    return choose_pair_count(s.n_high, s.n_low, s.lambda0_nm, s.target_r, s.ambient, s.substrate, cap).stack;
}

// Dipole chain from the measured polarization numbers: thermal weighting,
// equivalent ratio, azimuth, out-of-plane angles and overlaps.
struct DipoleChain {
    double thermal = 0.0;
    double ratio = 0.0; // equivalent circle ratio R
    double beta_deg = 0.0;
    std::array<double, 2> phi_deg{};
    std::array<double, 2> xi{};
    std::array<double, 2> branching{};
};

inline DipoleChain dipole_chain(const DipoleConfig& d) {
    DipoleChain c;
    c.thermal = thermal_ratio(d.delta_e_mev, d.temperature_k);
    const auto [n2, n3] = branching_factors(c.thermal);
    c.branching = {n2, n3};
    c.ratio = equivalent_circle_ratio(d.measured_ratio, c.thermal);
    c.beta_deg = solve_beta(d.theta_deg, c.ratio);
    const auto [px, py] = out_of_plane_angles(d.theta_deg, c.beta_deg);
    c.phi_deg = d.phi_deg ? *d.phi_deg : std::array<double, 2>{px, py};
    c.xi = {xi_overlap(c.phi_deg[0]), xi_overlap(c.phi_deg[1])};
    return c;
}

inline EmitterModel build_emitter(const EmitterConfig& e, const DipoleChain& dip) {
    std::vector<GaussianPeak> peaks;
    const bool derived = std::any_of(e.peaks.begin(), e.peaks.end(), [](const PeakSpec& p) { return !p.weight; });
    if (derived && e.peaks.size() != 2)
        throw ConfigurationError("emitter: peak weights may be omitted only for a two-peak doublet");
    for (std::size_t i = 0; i < e.peaks.size(); ++i) {
        const auto& p = e.peaks[i];
        peaks.push_back({p.center_nm, p.fwhm_nm, derived ? e.debye_waller * dip.branching[i] : *p.weight});
    }
    PhononSideband psb = ReplicaPsb{};
    if (const auto* r = std::get_if<ReplicaSpec>(&e.psb))
        psb = phonon_replicas(peaks.back().center, e.debye_waller, r->count, r->spacing_mev, r->first_fwhm_nm);
    else
        psb = TabulatedPsb{read_spectrum(std::get<std::filesystem::path>(e.psb))};
    return EmitterModel(std::move(peaks), std::move(psb), e.debye_waller, e.zpl_window);
}

// Penetration depths (um) of both mirrors at their design wavelengths.
inline std::array<double, 2> transfer_matrix_penetration(const LayerStack& planar, const StackConfig& pc,
                                                         const LayerStack& concave, const StackConfig& cc) {
    return {1e-3 * penetration_depth(planar, pc.lambda0_nm), 1e-3 * penetration_depth(concave, cc.lambda0_nm)};
}

// Everything the commands need, derived once from a RunConfig.
struct Scenario {
    RunConfig config;
    LayerStack planar;
    LayerStack concave;
    DipoleChain dipoles;
    EmitterModel model;
    std::vector<double> grid;
    CavityGeometry geometry;
    double mode_volume_um3 = 0.0;

    // Lorentzian filter at lambda_cav for a cavity of the given linewidth.
    ModeFilter filter(double lambda_cav, double linewidth_nm) const {
        const double q = q_from_linewidth(lambda_cav, linewidth_nm);
        return {lambda_cav, q, f_max(lambda_cav, config.cavity.medium_index, q, mode_volume_um3)};
    }
    ModeFilter filter(double lambda_cav) const { return filter(lambda_cav, config.cavity.linewidth_nm); }

    ZplCoupling coupling() const { return ZplCoupling(model, {dipoles.xi[0], dipoles.xi[1]}, grid); }
};

inline Scenario build_scenario(const RunConfig& cfg) {
    const auto planar = build_stack(cfg.planar);
    const auto concave = build_stack(cfg.concave);
    const auto dip = dipole_chain(cfg.dipoles);
    auto model = build_emitter(cfg.emitter, dip);
    CavityGeometry g{cfg.cavity.roc_um, cfg.cavity.gap_um, {0.0, 0.0}, cfg.cavity.medium_index};
    g.penetration_um = cfg.cavity.penetration_um
                           ? *cfg.cavity.penetration_um
                           : transfer_matrix_penetration(planar, cfg.planar, concave, cfg.concave);
    validate(g);
    const double v = cfg.cavity.mode_volume_um3 ? *cfg.cavity.mode_volume_um3
                                                : mode_volume_gaussian(g, cfg.coupling.lambda_cav_nm);
    return {cfg,  planar, concave, dip, std::move(model),
            uniform_grid(cfg.emitter.grid.lo, cfg.emitter.grid.hi, cfg.emitter.grid_step_nm), g, v};
}

} // namespace zplcav
