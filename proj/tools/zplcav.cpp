#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "zplcav/zplcav.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace zplcav;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitComputation = 3;
constexpr int kExitReproduction = 4;

double num(double x) { return round_significant(x); }

json num_array(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

void emit_error(const std::string& kind, const std::string& message, const std::vector<std::string>& problems = {}) {
    json e{{"kind", kind}, {"message", message}};
    if (!problems.empty()) e["problems"] = problems;
    std::cerr << json{{"error", e}}.dump(2) << '\n';
}

struct Context {
    std::string config_path = ZPLCAV_DEFAULT_CONFIG;
    RunConfig config;
    fs::path out;

    void load() {
        config = load_config(config_path);
        const char* env = std::getenv("ZPLCAV_OUTPUT_DIR");
        out = env && *env ? fs::path(env) : fs::path(config.output_dir);
        fs::create_directories(out);
    }

    // JSON goes both to stdout and to <out>/<name>.json.
    void report(const std::string& name, const json& j) const {
        const auto text = j.dump(2);
        std::ofstream(out / (name + ".json")) << text << '\n';
        std::cout << text << '\n';
    }
};

json stack_json(const LayerStack& s, double lambda0) {
    const auto r = reflect(s, lambda0);
    json j{{"layers", s.layers.size()},
           {"reflectance", num(r.reflectance)},
           {"phase_rad", num(r.phase)},
           {"penetration_nm", num(penetration_depth(s, lambda0))}};
    if (const auto b = stop_band(s, {lambda0 * 0.6, lambda0 * 1.4}, 0.99))
        j["stop_band_R099_nm"] = {num(b->lo), num(b->hi)};
    else
        j["stop_band_R099_nm"] = nullptr;
    return j;
}

int cmd_modes(Context& ctx, double lo, double hi, int max_order) {
    const auto s = build_scenario(ctx.config);
    const auto& g = s.geometry;
    const double rp = reflect(s.planar, ctx.config.planar.lambda0_nm).reflectance;
    const double rc = reflect(s.concave, ctx.config.concave.lambda0_nm).reflectance;
    const double finesse = finesse_from_reflectivity(rp, rc);
    auto modes = resonant_wavelengths(g, {lo, hi}, max_order);
    std::vector<std::vector<double>> rows;
    for (auto& m : modes) {
        m.linewidth_fwhm_nm = linewidth_from_finesse(m.wavelength_nm, g.optical_length(), finesse);
        rows.push_back({double(m.q), double(m.m), double(m.n), m.wavelength_nm, m.linewidth_fwhm_nm,
                        m.quality_factor(), m.mode_volume_um3});
    }
    write_csv(ctx.out / "modes.csv", {"q", "m", "n", "wavelength_nm", "fwhm_nm", "Q", "V_um3"}, rows);
    json list = json::array();
    for (const auto& m : modes)
        list.push_back({{"q", m.q}, {"q_total", m.q_total}, {"m", m.m}, {"n", m.n},
                        {"wavelength_nm", num(m.wavelength_nm)}, {"dark_on_axis", m.dark_on_axis}});
    ctx.report("modes", {{"optical_length_um", num(g.optical_length())},
                         {"penetration_um", num_array({g.penetration_um[0], g.penetration_um[1]})},
                         {"rayleigh_range_um", num(rayleigh_range(g))},
                         {"gouy_phase_rad", num(gouy_phase(g))},
                         {"mode_volume_um3", num(mode_volume_gaussian(g, ctx.config.coupling.lambda_cav_nm))},
                         {"finesse", num(finesse)},
                         {"modes", list}});
    return 0;
}

int cmd_mirror(Context& ctx, const std::string& which, double lo, double hi, double step, bool field) {
    const auto s = build_scenario(ctx.config);
    const auto& stack = which == "planar" ? s.planar : s.concave;
    const double lambda0 = which == "planar" ? ctx.config.planar.lambda0_nm : ctx.config.concave.lambda0_nm;
    std::vector<std::vector<double>> rows;
    for (double l : uniform_grid(lo, hi, step)) {
        const auto r = reflect(stack, l);
        rows.push_back({l, r.reflectance, r.phase});
    }
    write_csv(ctx.out / ("mirror_" + which + ".csv"), {"wavelength_nm", "R", "phase_rad"}, rows);
    json j{{"mirror", which}, {"lambda0_nm", num(lambda0)}, {"stack", stack_json(stack, lambda0)}};
    if (field) {
        const double gap = 1e3 * ctx.config.cavity.gap_um;
        const auto f = cavity_field_profile(s.planar, gap, s.concave, lambda0);
        std::vector<std::vector<double>> prow;
        for (std::size_t i = 0; i < f.profile.positions.size(); ++i)
            prow.push_back({f.profile.positions[i], f.profile.intensity[i], f.profile.index[i]});
        write_csv(ctx.out / "field.csv", {"z_nm", "intensity", "index"}, prow);
        const auto near = nearest_antinode(f.profile, 0.0);
        j["field"] = {{"resonance_nm", num(f.resonance_nm)},
                      {"interior_antinodes", antinode_count(f.profile, {0.0, gap})},
                      {"surface_antinode_nm", near ? json(num(*near)) : json(nullptr)},
                      {"effective_field_length_nm", num(effective_field_length(f.profile, near ? *near : 0.0))}};
    }
    ctx.report("mirror_" + which, j);
    return 0;
}

int cmd_dipole(Context& ctx, const std::string& polar_file) {
    const auto& d = ctx.config.dipoles;
    const auto c = dipole_chain(d);
    json j{{"theta_deg", num(d.theta_deg)},
           {"thermal_ratio", num(c.thermal)},
           {"branching", num_array({c.branching[0], c.branching[1]})},
           {"equivalent_ratio", num(c.ratio)},
           {"beta_deg", num(c.beta_deg)},
           {"phi_deg", num_array({c.phi_deg[0], c.phi_deg[1]})},
           {"xi", num_array({c.xi[0], c.xi[1]})}};
    std::optional<fs::path> file = polar_file.empty() ? ctx.config.data.polarization : fs::path(polar_file);
    if (file) {
        const auto t = read_csv(*file);
        const auto a = t.column("angle_deg"), p2 = t.column("intensity_peak2"), p3 = t.column("intensity_peak3");
        std::vector<PolarizationSample> samples;
        for (const auto& r : t.rows) samples.push_back({r[a], r[p2], r[p3]});
        const auto pa = analyze_polarization(samples, c.thermal);
        const auto [px, py] = out_of_plane_angles(pa.theta_deg, pa.beta_deg);
        j["polarization_fit"] = {{"measured_ratio", num(pa.measured_ratio)},
                                 {"equivalent_ratio", num(pa.equivalent_ratio)},
                                 {"theta_deg", num(pa.theta_deg)},
                                 {"beta_deg", num(pa.beta_deg)},
                                 {"phi_deg", num_array({px, py})}};
    }
    ctx.report("dipole", j);
    return 0;
}

int cmd_enhance(Context& ctx) {
    const auto s = build_scenario(ctx.config);
    const auto c = s.coupling();
    const auto f = s.filter(ctx.config.coupling.lambda_cav_nm);
    const auto r = compose_coupling(c, f, ctx.config.coupling.f_psb);
    const auto best = optimal_tuning(c, ctx.config.coupling.optimal_range, f.q_factor, f.f_max);
    ctx.report("enhance", {{"lambda_cav_nm", num(f.lambda_cav)},
                           {"q_factor", num(f.q_factor)},
                           {"mode_volume_um3", num(s.mode_volume_um3)},
                           {"f_max", num(f.f_max)},
                           {"f_zpl", num(r.f_zpl)},
                           {"f_psb", num(r.f_psb)},
                           {"f_total", num(r.f_total)},
                           {"per_peak_enhancement", num_array(r.per_peak_enhancement)},
                           {"per_dipole_f_zpl", num_array(r.per_dipole_f_zpl)},
                           {"optimal_lambda_cav_nm", num(best.lambda_cav)},
                           {"optimal_f_zpl", num(best.f_zpl)}});
    return 0;
}

int cmd_tune(Context& ctx) {
    const auto& sc = ctx.config.scan;
    const auto s = build_scenario(ctx.config);
    const auto c = s.coupling();
    const auto f0 = s.filter(ctx.config.coupling.lambda_cav_nm);
    std::vector<ModeFilter> filters;
    if (sc.hi_nm == sc.lo_nm) filters.push_back({sc.lo_nm, f0.q_factor, f0.f_max});
    else filters = filter_sweep({sc.lo_nm, sc.hi_nm}, sc.step_nm, f0.q_factor, f0.f_max);
    const auto scan = tuning_scan(c, filters);

    // Emission columns restricted to the tuned region plus a margin.
    const Window cols{sc.lo_nm - 2.0, sc.hi_nm + 2.0};
    std::vector<std::size_t> idx;
    std::vector<std::string> header{"lambda_cav_nm"};
    for (std::size_t i = 0; i < s.grid.size(); ++i)
        if (cols.contains(s.grid[i])) {
            idx.push_back(i);
            header.push_back(format_number(s.grid[i]));
        }
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < scan.lambda_cav.size(); ++k) {
        std::vector<double> row{scan.lambda_cav[k]};
        for (auto i : idx) row.push_back(scan.spectra[k].density()[i]);
        rows.push_back(std::move(row));
    }
    write_csv(ctx.out / "tune.csv", header, rows);
    ctx.report("tune", {{"lambda_cav_nm", num_array(scan.lambda_cav)}, {"f_zpl", num_array(scan.f_zpl)}});
    return 0;
}

int cmd_inhom(Context& ctx, bool decay_csv) {
    const auto& ic = ctx.config.inhom;
    const auto s = build_scenario(ctx.config);
    const auto c = s.coupling();
    const auto m = inhom_model(s, c, ic.fwhm_nm, ic.cavity_fwhm_nm);
    const auto nodes = inhom_nodes(m);
    const double gamma0 = 1.0 / ic.lifetime_ns;
    const auto slope = f_inhom_vs_slope_consistency(nodes, gamma0);
    if (decay_csv) {
        const auto t = uniform_grid(0.0, ic.t_max_ns, ic.t_step_ns);
        const auto i = decay_curve(nodes, gamma0, t);
        std::vector<std::vector<double>> rows;
        for (std::size_t k = 0; k < t.size(); ++k) rows.push_back({t[k], i[k]});
        write_csv(ctx.out / "decay_curve.csv", {"t_ns", "intensity"}, rows);
    }
    ctx.report("inhom", {{"center_nm", num(m.center_nm)},
                         {"cavity_fwhm_nm", num(ic.cavity_fwhm_nm)},
                         {"inhomogeneous_fwhm_nm", num(ic.fwhm_nm)},
                         {"f_zpl_resonant", num(m.f_zpl_curve(m.center_nm))},
                         {"f_inhom", num(slope.f_inhom)},
                         {"gamma_ratio", num(slope.gamma_ratio)},
                         {"slope_discrepancy", num(slope.relative_discrepancy)},
                         {"quadrature_panels", nodes.panels}});
    return 0;
}

std::vector<DataPoint> load_points(const fs::path& p, const char* x, const char* y) {
    const auto t = read_csv(p);
    const auto ix = t.column(x), iy = t.column(y);
    std::vector<DataPoint> d;
    for (const auto& r : t.rows) d.push_back({r[ix], r[iy]});
    return d;
}

fs::path data_file(const std::string& flag, const std::optional<fs::path>& cfg, const char* what) {
    if (!flag.empty()) {
        if (!fs::is_regular_file(flag)) throw ValidationError({std::string("--data: file not found: ") + flag});
        return flag;
    }
    if (!cfg) throw ValidationError({std::string("no ") + what + " data: pass --data or set data." + what});
    return *cfg;
}

int cmd_fit_sat(Context& ctx, const std::string& file) {
    const auto d = load_points(data_file(file, ctx.config.data.saturation, "saturation"), "power_mW", "counts_per_s");
    const auto f = fit_saturation(d);
    ctx.report("fit_sat", {{"i_sat", num(f.i_sat)},
                           {"i_sat_error", num(f.i_sat_error)},
                           {"p_sat_mW", num(f.p_sat)},
                           {"p_sat_error", num(f.p_sat_error)},
                           {"residual_rms", num(f.residual)},
                           {"locally_optimal", saturation_locally_optimal(f, d)},
                           {"uncertainty_method", "1 sigma from residual-scaled (J^T J)^-1 at the optimum"}});
    return 0;
}

int cmd_fit_decay(Context& ctx, const std::string& file, bool baseline, double tau_ref) {
    const auto d = load_points(data_file(file, ctx.config.data.decay, "decay"), "t_ns", "counts");
    const auto f = fit_exponential(d, baseline);
    json j{{"tau_ns", num(f.tau)},
           {"tau_error", num(f.tau_error)},
           {"amplitude", num(f.amplitude)},
           {"baseline", num(f.baseline)},
           {"residual_rms", num(f.residual)},
           {"uncertainty_method", "1 sigma from residual-scaled (J^T J)^-1 at the optimum"}};
    if (tau_ref > 0.0) {
        j["reference_tau_ns"] = num(tau_ref);
        j["rate_change_percent"] = num(rate_change(tau_ref, f.tau));
    }
    ctx.report("fit_decay", j);
    return 0;
}

int cmd_reproduce(Context& ctx) {
    const auto rep = reproduce(ctx.config);
    std::ofstream(ctx.out / "reproduce.csv") << [&] {
        std::ostringstream s;
        write_report(s, rep);
        return s.str();
    }();
    write_report(std::cout, rep);
    for (const auto& n : rep.notes) std::cerr << "note: " << n << '\n';
    return rep.all_pass() ? 0 : kExitReproduction;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cavity coupling of an emitter zero-phonon line"};
    app.require_subcommand(1);
    Context ctx;
    app.add_option("-c,--config", ctx.config_path, "configuration document");

    double lo = 600.0, hi = 680.0, step = 0.1;
    int max_order = 4;
    auto* modes = app.add_subcommand("modes", "Hermite-Gauss resonances of the cavity");
    modes->add_option("--lo", lo, "band start, nm");
    modes->add_option("--hi", hi, "band end, nm");
    modes->add_option("--max-order", max_order, "largest m + n");

    std::string which = "concave";
    bool field = false;
    double mlo = 450.0, mhi = 850.0, mstep = 0.5;
    auto* mirror = app.add_subcommand("mirror", "transfer-matrix reflectivity of a mirror");
    mirror->add_option("--which", which)->check(CLI::IsMember({"planar", "concave"}));
    mirror->add_option("--lo", mlo);
    mirror->add_option("--hi", mhi);
    mirror->add_option("--step", mstep);
    mirror->add_flag("--field", field, "also sample the standing wave of the assembled cavity");

    std::string polar_file;
    auto* dipole = app.add_subcommand("dipole", "dipole orientation, branching and overlap factors");
    dipole->add_option("--data", polar_file, "polarization CSV");

    std::optional<double> lambda_cav, linewidth, f_psb, dw;
    auto* enhance = app.add_subcommand("enhance", "ZPL coupling and total rate");
    enhance->add_option("--lambda-cav", lambda_cav);
    enhance->add_option("--linewidth", linewidth);
    enhance->add_option("--f-psb", f_psb);
    enhance->add_option("--debye-waller", dw);

    std::optional<double> tlo, thi, tstep;
    auto* tune = app.add_subcommand("tune", "cavity spectra across a tuning scan");
    tune->add_option("--lo", tlo);
    tune->add_option("--hi", thi);
    tune->add_option("--step", tstep);

    std::optional<double> cav_fwhm, inh_fwhm, center;
    bool decay_csv = false;
    auto* inhom = app.add_subcommand("inhom", "inhomogeneously broadened rate enhancement");
    inhom->add_option("--cavity-fwhm", cav_fwhm);
    inhom->add_option("--fwhm", inh_fwhm);
    inhom->add_option("--center", center);
    inhom->add_flag("--decay-csv", decay_csv, "write decay_curve.csv");

    std::string sat_file;
    auto* fit_sat = app.add_subcommand("fit-sat", "saturation curve fit");
    fit_sat->add_option("--data", sat_file, "CSV power_mW,counts_per_s");

    std::string decay_file;
    bool baseline = false;
    double tau_ref = 0.0;
    auto* fit_decay = app.add_subcommand("fit-decay", "single exponential lifetime fit");
    fit_decay->add_option("--data", decay_file, "CSV t_ns,counts");
    fit_decay->add_flag("--baseline", baseline);
    fit_decay->add_option("--reference-tau", tau_ref, "lifetime without cavity, ns");

    auto* repro = app.add_subcommand("reproduce", "acceptance table against published values");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error("usage", e.what());
        return kExitValidation;
    }

    try {
        ctx.load();
        auto& cfg = ctx.config;
        if (lambda_cav) cfg.coupling.lambda_cav_nm = *lambda_cav;
        if (linewidth) cfg.cavity.linewidth_nm = *linewidth;
        if (f_psb) cfg.coupling.f_psb = *f_psb;
        if (dw) cfg.emitter.debye_waller = *dw;
        if (tlo) cfg.scan.lo_nm = *tlo;
        if (thi) cfg.scan.hi_nm = *thi;
        if (tstep) cfg.scan.step_nm = *tstep;
        if (cav_fwhm) cfg.inhom.cavity_fwhm_nm = *cav_fwhm;
        if (inh_fwhm) cfg.inhom.fwhm_nm = *inh_fwhm;
        if (center) cfg.inhom.center_nm = *center;

        if (*modes) return cmd_modes(ctx, lo, hi, max_order);
        if (*mirror) return cmd_mirror(ctx, which, mlo, mhi, mstep, field);
        if (*dipole) return cmd_dipole(ctx, polar_file);
        if (*enhance) return cmd_enhance(ctx);
        if (*tune) return cmd_tune(ctx);
        if (*inhom) return cmd_inhom(ctx, decay_csv);
        if (*fit_sat) return cmd_fit_sat(ctx, sat_file);
        if (*fit_decay) return cmd_fit_decay(ctx, decay_file, baseline, tau_ref);
        if (*repro) return cmd_reproduce(ctx);
    } catch (const ValidationError& e) {
        emit_error(e.kind(), e.what(), e.messages);
        return kExitValidation;
    } catch (const ConfigurationError& e) {
        emit_error(e.kind(), e.what());
        return kExitValidation;
    } catch (const ConvergenceError& e) {
        emit_error(e.kind(), e.what());
        return kExitComputation;
    } catch (const Error& e) {
        emit_error(e.kind(), e.what());
        return kExitComputation;
    } catch (const std::exception& e) {
        emit_error("internal", e.what());
        return kExitComputation;
    }
    return 0;
}
