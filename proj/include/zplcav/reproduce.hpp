#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include "zplcav/analysis.hpp"
#include "zplcav/cavity.hpp"
#include "zplcav/dbr.hpp"
#include "zplcav/dipole.hpp"
#include "zplcav/inhomogeneous.hpp"
#include "zplcav/io.hpp"
#include "zplcav/purcell.hpp"
#include "zplcav/scenario.hpp"

namespace zplcav {

// Cavity-position broadening around the configured center, with the filter
// Q and F_max fixed at the center.
inline InhomogeneousModel inhom_model(const Scenario& s, const ZplCoupling& c, double fwhm_nm,
                                      double cavity_fwhm_nm) {
    const double center = s.config.inhom.center_nm ? *s.config.inhom.center_nm : s.model.zpl_peaks().back().center;
    const ModeFilter f0 = s.filter(center, cavity_fwhm_nm);
    return {center, fwhm_nm, [&c, f0](double l) { return c.f_zpl({l, f0.q_factor, f0.f_max}); }};
}

enum class Comparison { absolute, relative, at_least, at_most };

inline const char* to_string(Comparison c) {
    switch (c) {
        case Comparison::absolute: return "abs";
        case Comparison::relative: return "rel";
        case Comparison::at_least: return "min";
        case Comparison::at_most: return "max";
    }
    return "?";
}

struct ReproRow {
    int criterion = 0;
    std::string quantity;
    double paper = 0.0;
    double computed = 0.0;
    double tolerance = 0.0;
    Comparison comparison = Comparison::absolute;
    bool pass = false;
};

inline ReproRow make_row(int criterion, std::string quantity, double paper, double computed, double tolerance,
                         Comparison cmp = Comparison::absolute) {
    ReproRow r{criterion, std::move(quantity), paper, computed, tolerance, cmp, false};
    switch (cmp) {
        case Comparison::absolute: r.pass = std::abs(computed - paper) <= tolerance; break;
        case Comparison::relative: r.pass = std::abs(computed - paper) <= tolerance * std::abs(paper); break;
        case Comparison::at_least: r.pass = computed >= paper; break;
        case Comparison::at_most: r.pass = computed <= paper; break;
    }
    if (!std::isfinite(computed)) r.pass = false;
    return r;
}

namespace detail {

inline double saturation_round_trip(double i_sat, double p_sat) {
    std::vector<DataPoint> d;
    for (int k = 0; k < 12; ++k) {
        const double p = 0.05 * std::pow(10.0, k / 5.0);
        d.push_back({p, saturation_model(p, i_sat, p_sat)});
    }
    const auto f = fit_saturation(d);
    return std::max(std::abs(f.i_sat / i_sat - 1.0), std::abs(f.p_sat / p_sat - 1.0));
}

inline double max_energy_defect(const LayerStack& s, Window band, double step) {
    double worst = 0.0;
    for (double l : uniform_grid(band.lo, band.hi, step)) {
        const auto r = reflect(s, l);
        worst = std::max(worst, std::abs(r.reflectance + r.transmittance - 1.0));
        const auto b = reflect(reversed(s), l);
        worst = std::max(worst, std::abs(b.reflectance + b.transmittance - 1.0));
    }
    return worst;
}

// Runs `f`; a library failure becomes a NaN (and so a failing row) instead of
// aborting the whole table.
template <class F>
double guarded(F&& f, std::string& note) {
    try {
        return f();
    } catch (const Error& e) {
        note = e.what();
        return std::nan("");
    }
}

} // namespace detail

struct ReproReport {
    std::vector<ReproRow> rows;
    std::vector<std::string> notes; // failures raised while computing rows

    bool all_pass() const {
        return std::all_of(rows.begin(), rows.end(), [](const ReproRow& r) { return r.pass; });
    }
    bool criterion_pass(int c) const {
        bool any = false, ok = true;
        for (const auto& r : rows)
            if (r.criterion == c) {
                any = true;
                ok = ok && r.pass;
            }
        return any && ok;
    }
};

// The acceptance table. Rows marked with the scenario come from the supplied
// configuration; the rest use fixed published inputs.
inline ReproReport reproduce(const RunConfig& cfg) {
    ReproReport rep;
    auto add = [&](ReproRow r) { rep.rows.push_back(std::move(r)); };
    auto guard = [&](auto&& f) {
        std::string note;
        const double v = detail::guarded(f, note);
        if (!note.empty()) rep.notes.push_back(note);
        return v;
    };
    const double lam = 637.0;

    add(make_row(1, "f_max_effective_q", 9.2, f_max(lam, 1.0, q_eff(lam, 0.7, 0.4), 1.24), 0.1));
    add(make_row(2, "f_max_high_q", 33.6, f_max(lam, 1.0, q_eff(lam, 0.2, 0.1), 1.24), 0.2));

    std::optional<Scenario> sc;
    std::optional<ZplCoupling> coupling;
    guard([&] {
        sc.emplace(build_scenario(cfg));
        coupling.emplace(sc->coupling());
        return 0.0;
    });

    const double fz = guard([&] { return coupling.value().f_zpl(sc->filter(cfg.coupling.lambda_cav_nm)); });
    add(make_row(3, "f_zpl", 0.25, fz, 0.04));
    const double fz_opt = guard([&] {
        const auto f0 = sc->filter(cfg.coupling.lambda_cav_nm);
        return optimal_tuning(coupling.value(), cfg.coupling.optimal_range, f0.q_factor, f0.f_max).f_zpl;
    });
    add(make_row(3, "f_zpl_optimal_tuning", 0.25, fz_opt, 0.04));

    add(make_row(4, "total_rate", 1.14, total_rate(0.25, 0.93, 0.044), 0.01));
    add(make_row(4, "total_rate_high_q", 1.71, total_rate(33.6 * 0.044 * 0.56, 0.93, 0.044), 0.02));

    std::optional<InhomNodes> nodes;
    const double fi = guard([&] {
        nodes.emplace(inhom_nodes(inhom_model(*sc, coupling.value(), cfg.inhom.fwhm_nm, cfg.inhom.cavity_fwhm_nm)));
        return f_inhom(*nodes);
    });
    add(make_row(5, "f_inhom", 0.364, fi, 0.03));

    const double thermal = thermal_ratio(1.5, 77.0);
    const auto [n2, n3] = branching_factors(thermal);
    add(make_row(6, "thermal_ratio", 0.80, thermal, 0.01));
    add(make_row(6, "branching_peak2", 0.44, n2, 0.01));
    add(make_row(6, "branching_peak3", 0.56, n3, 0.01));

    const double ratio = equivalent_circle_ratio(0.58, 0.8);
    add(make_row(7, "equivalent_ratio", 0.73, ratio, 0.01));
    const auto [phx, phy] = out_of_plane_angles(49.0, solve_beta(49.0, ratio));
    add(make_row(7, "phi_peak2_deg", 39.0, phx, 1.0));
    add(make_row(7, "phi_peak3_deg", 24.6, phy, 1.0));

    const double c49 = std::pow(std::cos(deg2rad(49.0)), 2);
    add(make_row(8, "theta_round_trip_deg", 49.0, polar_from_extrema(c49, 1.0), 0.1));

    // Default stacks independent of the configuration under test.
    RunConfig ref;
    ref.planar = {1.0, 1.457, 2.40, 1.52, std::nullopt, 0.997, lam, {{1.52, std::nullopt}}};
    ref.concave = {1.0, 1.457, 2.10, 1.52, 20, 0.997, lam, {}};
    const auto planar = build_stack(ref.planar);
    const auto concave = build_stack(ref.concave);
    const auto pen = transfer_matrix_penetration(planar, ref.planar, concave, ref.concave);
    const CavityGeometry g_tm{7.6, 1.11, pen, 1.0};
    add(make_row(9, "mode_volume_transfer_matrix_um3", 1.24, guard([&] { return mode_volume_gaussian(g_tm, lam); }),
                 0.15, Comparison::relative));
    add(make_row(9, "mode_volume_bare_gap_um3", 0.474,
                 mode_volume_gaussian(CavityGeometry{7.6, 1.11, {0.0, 0.0}, 1.0}, lam), 1e-3));

    add(make_row(10, "concave_reflectance", 0.9999, reflect(concave, lam).reflectance, 0.0, Comparison::at_least));
    const auto band = stop_band(concave, {450.0, 850.0}, 0.99);
    add(make_row(10, "stop_band_lo_nm", 580.0, band ? band->lo : std::nan(""), 0.0, Comparison::at_most));
    add(make_row(10, "stop_band_hi_nm", 695.0, band ? band->hi : std::nan(""), 0.0, Comparison::at_least));

    std::optional<CavityField> field;
    const double antinodes = guard([&] {
        field.emplace(cavity_field_profile(planar, 1110.0, concave, lam));
        return static_cast<double>(antinode_count(field->profile, {0.0, 1110.0}));
    });
    add(make_row(11, "interior_antinodes", 3.0, antinodes, 0.0));
    const double surf = guard([&] {
        const auto z = nearest_antinode(field.value().profile, 0.0);
        if (!z) throw DegenerateError("no antinode in profile");
        return *z;
    });
    add(make_row(11, "surface_antinode_offset_nm", 0.0, surf, 5.0));

    add(make_row(12, "rate_change_percent", 39.4, rate_change(30.8, 22.1), 0.2));
    add(make_row(12, "single_emitter_fraction", 0.975, single_emitter_fraction(0.05), 0.001));

    add(make_row(13, "saturation_round_trip_a", 1e-6,
                 guard([] { return detail::saturation_round_trip(15.1e3, 1.89); }), 0.0, Comparison::at_most));
    add(make_row(13, "saturation_round_trip_b", 1e-6,
                 guard([] { return detail::saturation_round_trip(154e3, 1.02); }), 0.0, Comparison::at_most));

    add(make_row(14, "zpl_path_identity", 1e-10, guard([&] {
                     const auto f = sc->filter(cfg.coupling.lambda_cav_nm);
                     const double a = coupling.value().f_zpl(f), b = coupling->f_zpl_per_dipole(f);
                     return std::abs(a - b) / std::max(std::abs(a), 1e-300);
                 }),
                 0.0, Comparison::at_most));
    add(make_row(14, "slope_vs_closed_form", 1e-3, guard([&] {
                     return f_inhom_vs_slope_consistency(nodes.value(), 1.0 / cfg.inhom.lifetime_ns)
                         .relative_discrepancy;
                 }),
                 0.0, Comparison::at_most));
    add(make_row(14, "energy_conservation", 1e-9,
                 std::max(detail::max_energy_defect(concave, {450.0, 850.0}, 1.0),
                          detail::max_energy_defect(planar, {450.0, 850.0}, 1.0)),
                 0.0, Comparison::at_most));
    add(make_row(14, "inhom_delta_limit", 1e-6, guard([&] {
                     auto m = inhom_model(*sc, coupling.value(), 1e-4, cfg.inhom.cavity_fwhm_nm);
                     const double exact = m.f_zpl_curve(m.center_nm);
                     return std::abs(f_inhom(m) - exact) / exact;
                 }),
                 0.0, Comparison::at_most));
    return rep;
}

inline void write_report(std::ostream& out, const ReproReport& rep) {
    out << "criterion,quantity,paper_value,computed_value,tolerance,comparison,pass\n";
    for (const auto& r : rep.rows)
        out << r.criterion << ',' << r.quantity << ',' << format_number(r.paper) << ','
            << format_number(r.computed) << ',' << format_number(r.tolerance) << ',' << to_string(r.comparison)
            << ',' << (r.pass ? "PASS" : "FAIL") << '\n';
}

} // namespace zplcav
