#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "zplcav/dbr.hpp"
#include "zplcav/errors.hpp"
#include "zplcav/io.hpp"

namespace zplcav {

struct LayerSpec {
    double index = 1.0;
    std::optional<double> thickness_nm; // else quarter wave at the stack lambda0
};

struct StackConfig {
    double ambient = 1.0;
    double substrate = 1.457;
    double n_high = 0.0;
    double n_low = 0.0;
    std::optional<int> count; // nullopt: chosen to reach target_r
    double target_r = 0.997;
    double lambda0_nm = 637.0;
    std::vector<LayerSpec> extra_layers; // on the gap side, before the pairs
};

struct CavityConfig {
    double roc_um = 7.6;
    double gap_um = 1.11;
    std::optional<std::array<double, 2>> penetration_um; // nullopt: from the mirror stacks
    double medium_index = 1.0;
    double linewidth_nm = 0.7;
    std::optional<double> mode_volume_um3; // nullopt: Gaussian estimate
};

struct PeakSpec {
    double center_nm = 0.0;
    double fwhm_nm = 0.0;
    std::optional<double> weight; // nullopt: debye_waller * thermal branching
};

struct ReplicaSpec {
    int count = 4;
    double spacing_mev = 65.0;
    double first_fwhm_nm = 4.0;
};

struct EmitterConfig {
    std::vector<PeakSpec> peaks;
    std::variant<ReplicaSpec, std::filesystem::path> psb = ReplicaSpec{};
    double debye_waller = 0.044;
    Window zpl_window{634.0, 640.0};
    Window grid{620.0, 840.0};
    double grid_step_nm = 0.005;
};

struct DipoleConfig {
    double theta_deg = 49.0;
    double measured_ratio = 0.58;
    double delta_e_mev = 1.5;
    double temperature_k = 77.0;
    std::optional<std::array<double, 2>> phi_deg; // override (peak 2, peak 3)
};

struct CouplingConfig {
    double lambda_cav_nm = 637.0;
    double f_psb = 0.93;
    Window optimal_range{635.0, 639.0};
};

struct ScanConfig {
    double lo_nm = 635.0;
    double hi_nm = 639.0;
    double step_nm = 0.05;
};

struct InhomConfig {
    double cavity_fwhm_nm = 0.2;
    double fwhm_nm = 0.5;
    std::optional<double> center_nm; // nullopt: last ZPL peak
    double lifetime_ns = 30.8;
    double t_max_ns = 150.0;
    double t_step_ns = 0.5;
};

struct DataFiles {
    std::optional<std::filesystem::path> saturation;
    std::optional<std::filesystem::path> decay;
    std::optional<std::filesystem::path> polarization;
};

struct RunConfig {
    CavityConfig cavity;
    StackConfig planar;
    StackConfig concave;
    EmitterConfig emitter;
    DipoleConfig dipoles;
    CouplingConfig coupling;
    ScanConfig scan;
    InhomConfig inhom;
    DataFiles data;
    std::string output_dir = "out";
};

namespace detail {

using nlohmann::json;

// Walks the document collecting every problem before giving up.
class ConfigChecker {
public:
    std::vector<std::string> problems;

    void fail(const std::string& path, const std::string& msg) { problems.push_back(path + ": " + msg); }

    bool is_object(const json& j, const std::string& path) {
        if (j.is_object()) return true;
        fail(path, "expected an object");
        return false;
    }

    void allow(const json& obj, const std::string& path, std::initializer_list<std::string_view> keys) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            bool ok = false;
            for (auto k : keys) ok = ok || it.key() == k;
            if (!ok) fail(path + "." + it.key(), "unknown key");
        }
    }

    void number(const json& obj, const std::string& path, const char* key, double& out, double lo, double hi,
                bool required = false) {
        if (!obj.contains(key)) {
            if (required) fail(path + "." + key, "missing");
            return;
        }
        const auto& v = obj.at(key);
        if (!v.is_number()) {
            fail(path + "." + key, "expected a number");
            return;
        }
        const double x = v.get<double>();
        if (!(x >= lo && x <= hi)) {
            fail(path + "." + key, "value " + format_number(x) + " outside [" + format_number(lo) + ", " +
                                       format_number(hi) + "]");
            return;
        }
        out = x;
    }

    void optional_number(const json& obj, const std::string& path, const char* key, std::optional<double>& out,
                         double lo, double hi) {
        if (!obj.contains(key)) return;
        double x = 0.0;
        const auto before = problems.size();
        number(obj, path, key, x, lo, hi);
        if (problems.size() == before) out = x;
    }

    void integer(const json& obj, const std::string& path, const char* key, int& out, int lo, int hi) {
        if (!obj.contains(key)) return;
        const auto& v = obj.at(key);
        if (!v.is_number_integer() || v.get<long long>() < lo || v.get<long long>() > hi) {
            fail(path + "." + key, "expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
            return;
        }
        out = v.get<int>();
    }

    std::optional<std::array<double, 2>> pair(const json& v, const std::string& path, double lo, double hi) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            fail(path, "expected [number, number]");
            return std::nullopt;
        }
        std::array<double, 2> out{v[0].get<double>(), v[1].get<double>()};
        for (double x : out)
            if (!(x >= lo && x <= hi)) {
                fail(path, "values must lie in [" + format_number(lo) + ", " + format_number(hi) + "]");
                return std::nullopt;
            }
        return out;
    }

    void window(const json& obj, const std::string& path, const char* key, Window& out) {
        if (!obj.contains(key)) return;
        if (auto p = pair(obj.at(key), path + "." + key, 0.0, 1e5)) {
            if (!((*p)[0] < (*p)[1])) {
                fail(path + "." + key, "need lo < hi");
                return;
            }
            out = {(*p)[0], (*p)[1]};
        }
    }

    void file(const json& obj, const std::string& path, const char* key, const std::filesystem::path& base,
              std::optional<std::filesystem::path>& out) {
        if (!obj.contains(key)) return;
        const auto& v = obj.at(key);
        if (!v.is_string()) {
            fail(path + "." + key, "expected a file path");
            return;
        }
        std::filesystem::path p = v.get<std::string>();
        if (p.is_relative()) p = base / p;
        if (!std::filesystem::is_regular_file(p)) {
            fail(path + "." + key, "file not found: " + p.string());
            return;
        }
        // Referenced data must parse now, not halfway through a run.
        try {
            (void)read_csv(p);
        } catch (const Error& e) {
            fail(path + "." + key, e.what());
            return;
        }
        out = p;
    }

    void stack(const json& j, const std::string& path, StackConfig& s) {
        if (!is_object(j, path)) return;
        allow(j, path, {"ambient", "substrate", "pairs", "extra_layers"});
        number(j, path, "ambient", s.ambient, 1.0, 5.0);
        number(j, path, "substrate", s.substrate, 1.0, 5.0);
        if (!j.contains("pairs")) {
            fail(path + ".pairs", "missing");
        } else if (const auto& p = j.at("pairs"); is_object(p, path + ".pairs")) {
            const auto pp = path + ".pairs";
            allow(p, pp, {"nH", "nL", "count", "target_R", "lambda0_nm"});
            number(p, pp, "nH", s.n_high, 1.0, 5.0, true);
            number(p, pp, "nL", s.n_low, 1.0, 5.0, true);
            number(p, pp, "lambda0_nm", s.lambda0_nm, 100.0, 5000.0);
            number(p, pp, "target_R", s.target_r, 0.0, 1.0);
            if (p.contains("count")) {
                if (p.at("count").is_string()) {
                    if (p.at("count") != "auto") fail(pp + ".count", "expected an integer or \"auto\"");
                } else {
                    int c = 0;
                    const auto before = problems.size();
                    integer(p, pp, "count", c, 0, 200);
                    if (problems.size() == before) s.count = c;
                }
            } else {
                s.count = std::nullopt;
            }
        }
        if (j.contains("extra_layers")) {
            const auto& l = j.at("extra_layers");
            if (!l.is_array()) {
                fail(path + ".extra_layers", "expected an array");
                return;
            }
            for (std::size_t i = 0; i < l.size(); ++i) {
                const auto lp = path + ".extra_layers[" + std::to_string(i) + "]";
                if (!is_object(l[i], lp)) continue;
                allow(l[i], lp, {"index", "thickness_nm"});
                LayerSpec spec;
                number(l[i], lp, "index", spec.index, 1.0, 5.0, true);
                optional_number(l[i], lp, "thickness_nm", spec.thickness_nm, 1e-6, 1e6);
                s.extra_layers.push_back(spec);
            }
        }
    }
};

} // namespace detail

// Parses and validates a configuration document (JSON with comments). All
// problems are collected into a single ValidationError. Relative file paths
// resolve against `base`.
inline RunConfig parse_config(const std::string& text, const std::filesystem::path& base = ".") {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ValidationError({std::string("config: ") + e.what()});
    }
    detail::ConfigChecker c;
    RunConfig cfg;
    cfg.planar = {1.0, 1.457, 2.40, 1.52, std::nullopt, 0.997, 637.0, {}};
    cfg.concave = {1.0, 1.457, 2.10, 1.52, 20, 0.997, 637.0, {}};
    if (!c.is_object(doc, "$")) throw ValidationError(c.problems);
    c.allow(doc, "$", {"output_dir", "cavity", "mirrors", "emitter", "dipoles", "coupling", "scan", "inhom", "data"});

    if (doc.contains("output_dir")) {
        if (doc["output_dir"].is_string()) cfg.output_dir = doc["output_dir"].get<std::string>();
        else c.fail("$.output_dir", "expected a string");
    }

    if (doc.contains("cavity") && c.is_object(doc["cavity"], "$.cavity")) {
        const auto& j = doc["cavity"];
        const std::string p = "$.cavity";
        c.allow(j, p, {"roc_um", "gap_um", "penetration_um", "medium_index", "linewidth_nm", "mode_volume_um3"});
        c.number(j, p, "roc_um", cfg.cavity.roc_um, 1e-6, 1e9);
        c.number(j, p, "gap_um", cfg.cavity.gap_um, 1e-6, 1e6);
        c.number(j, p, "medium_index", cfg.cavity.medium_index, 1.0, 5.0);
        c.number(j, p, "linewidth_nm", cfg.cavity.linewidth_nm, 1e-9, 1e3);
        if (j.contains("penetration_um")) {
            if (j["penetration_um"] == "auto") cfg.cavity.penetration_um.reset();
            else cfg.cavity.penetration_um = c.pair(j["penetration_um"], p + ".penetration_um", 0.0, 1e3);
        }
        if (j.contains("mode_volume_um3") && j["mode_volume_um3"] != "auto")
            c.optional_number(j, p, "mode_volume_um3", cfg.cavity.mode_volume_um3, 1e-9, 1e9);
    }

    if (doc.contains("mirrors") && c.is_object(doc["mirrors"], "$.mirrors")) {
        const auto& j = doc["mirrors"];
        c.allow(j, "$.mirrors", {"planar", "concave"});
        if (j.contains("planar")) {
            cfg.planar.extra_layers.clear();
            c.stack(j["planar"], "$.mirrors.planar", cfg.planar);
        }
        if (j.contains("concave")) {
            cfg.concave.extra_layers.clear();
            c.stack(j["concave"], "$.mirrors.concave", cfg.concave);
        }
    }

    if (doc.contains("emitter") && c.is_object(doc["emitter"], "$.emitter")) {
        const auto& j = doc["emitter"];
        const std::string p = "$.emitter";
        c.allow(j, p, {"zpl", "psb", "debye_waller", "zpl_window_nm", "grid"});
        c.number(j, p, "debye_waller", cfg.emitter.debye_waller, 1e-12, 1.0);
        c.window(j, p, "zpl_window_nm", cfg.emitter.zpl_window);
        if (!j.contains("zpl")) {
            c.fail(p + ".zpl", "missing");
        } else if (c.is_object(j["zpl"], p + ".zpl")) {
            const auto& z = j["zpl"];
            c.allow(z, p + ".zpl", {"peaks", "doublet"});
            if (z.contains("peaks") == z.contains("doublet")) {
                c.fail(p + ".zpl", "give exactly one of 'peaks' or 'doublet'");
            } else if (z.contains("peaks")) {
                const auto& pk = z["peaks"];
                if (!pk.is_array() || pk.empty()) c.fail(p + ".zpl.peaks", "expected a non-empty array");
                else
                    for (std::size_t i = 0; i < pk.size(); ++i) {
                        const auto pp = p + ".zpl.peaks[" + std::to_string(i) + "]";
                        if (!c.is_object(pk[i], pp)) continue;
                        c.allow(pk[i], pp, {"center_nm", "fwhm_nm", "weight"});
                        PeakSpec s;
                        c.number(pk[i], pp, "center_nm", s.center_nm, 1.0, 1e5, true);
                        c.number(pk[i], pp, "fwhm_nm", s.fwhm_nm, 1e-9, 1e3, true);
                        c.optional_number(pk[i], pp, "weight", s.weight, 0.0, 1.0);
                        cfg.emitter.peaks.push_back(s);
                    }
            } else if (c.is_object(z["doublet"], p + ".zpl.doublet")) {
                // Upper-energy peak first: (peak 2, peak 3).
                const auto& d = z["doublet"];
                const auto dp = p + ".zpl.doublet";
                c.allow(d, dp, {"center_nm", "splitting_mev", "fwhm_nm"});
                double center = 637.0, split = 1.5, fwhm = 0.4;
                c.number(d, dp, "center_nm", center, 1.0, 1e5);
                c.number(d, dp, "splitting_mev", split, 0.0, 1e3);
                c.number(d, dp, "fwhm_nm", fwhm, 1e-9, 1e3);
                const double upper = ev_to_wavelength(wavelength_to_ev(center) + 1e-3 * split);
                cfg.emitter.peaks = {{upper, fwhm, std::nullopt}, {center, fwhm, std::nullopt}};
            }
        }
        if (j.contains("psb") && c.is_object(j["psb"], p + ".psb")) {
            const auto& s = j["psb"];
            c.allow(s, p + ".psb", {"file", "replicas"});
            if (s.contains("file") == s.contains("replicas")) {
                c.fail(p + ".psb", "give exactly one of 'file' or 'replicas'");
            } else if (s.contains("file")) {
                std::optional<std::filesystem::path> f;
                c.file(s, p + ".psb", "file", base, f);
                if (f) cfg.emitter.psb = *f;
            } else if (c.is_object(s["replicas"], p + ".psb.replicas")) {
                const auto& r = s["replicas"];
                const auto rp = p + ".psb.replicas";
                c.allow(r, rp, {"count", "spacing_mev", "first_fwhm_nm"});
                ReplicaSpec spec;
                c.integer(r, rp, "count", spec.count, 1, 20);
                c.number(r, rp, "spacing_mev", spec.spacing_mev, 1e-6, 1e3);
                c.number(r, rp, "first_fwhm_nm", spec.first_fwhm_nm, 1e-6, 1e3);
                cfg.emitter.psb = spec;
            }
        }
        if (j.contains("grid") && c.is_object(j["grid"], p + ".grid")) {
            const auto& g = j["grid"];
            c.allow(g, p + ".grid", {"lo_nm", "hi_nm", "step_nm"});
            c.number(g, p + ".grid", "lo_nm", cfg.emitter.grid.lo, 1.0, 1e5);
            c.number(g, p + ".grid", "hi_nm", cfg.emitter.grid.hi, 1.0, 1e5);
            c.number(g, p + ".grid", "step_nm", cfg.emitter.grid_step_nm, 1e-6, 100.0);
            if (!(cfg.emitter.grid.lo < cfg.emitter.grid.hi)) c.fail(p + ".grid", "need lo_nm < hi_nm");
        }
    } else if (!doc.contains("emitter")) {
        cfg.emitter.peaks = {{ev_to_wavelength(wavelength_to_ev(637.0) + 1.5e-3), 0.4, std::nullopt},
                             {637.0, 0.4, std::nullopt}};
    }

    if (doc.contains("dipoles") && c.is_object(doc["dipoles"], "$.dipoles")) {
        const auto& j = doc["dipoles"];
        const std::string p = "$.dipoles";
        c.allow(j, p, {"theta_deg", "measured_ratio", "delta_e_mev", "temperature_k", "phi_deg"});
        c.number(j, p, "theta_deg", cfg.dipoles.theta_deg, 0.0, 90.0);
        c.number(j, p, "measured_ratio", cfg.dipoles.measured_ratio, 1e-12, 1e12);
        c.number(j, p, "delta_e_mev", cfg.dipoles.delta_e_mev, 0.0, 1e3);
        c.number(j, p, "temperature_k", cfg.dipoles.temperature_k, 1e-9, 1e5);
        if (j.contains("phi_deg")) cfg.dipoles.phi_deg = c.pair(j["phi_deg"], p + ".phi_deg", 0.0, 90.0);
    }

    if (doc.contains("coupling") && c.is_object(doc["coupling"], "$.coupling")) {
        const auto& j = doc["coupling"];
        c.allow(j, "$.coupling", {"lambda_cav_nm", "f_psb", "optimal_range_nm"});
        c.number(j, "$.coupling", "lambda_cav_nm", cfg.coupling.lambda_cav_nm, 1.0, 1e5);
        c.number(j, "$.coupling", "f_psb", cfg.coupling.f_psb, 0.0, 1e6);
        c.window(j, "$.coupling", "optimal_range_nm", cfg.coupling.optimal_range);
    }

    if (doc.contains("scan") && c.is_object(doc["scan"], "$.scan")) {
        const auto& j = doc["scan"];
        c.allow(j, "$.scan", {"lo_nm", "hi_nm", "step_nm"});
        c.number(j, "$.scan", "lo_nm", cfg.scan.lo_nm, 1.0, 1e5);
        c.number(j, "$.scan", "hi_nm", cfg.scan.hi_nm, 1.0, 1e5);
        c.number(j, "$.scan", "step_nm", cfg.scan.step_nm, 1e-6, 1e3);
        if (!(cfg.scan.lo_nm <= cfg.scan.hi_nm)) c.fail("$.scan", "need lo_nm <= hi_nm");
    }

    if (doc.contains("inhom") && c.is_object(doc["inhom"], "$.inhom")) {
        const auto& j = doc["inhom"];
        const std::string p = "$.inhom";
        c.allow(j, p, {"cavity_fwhm_nm", "fwhm_nm", "center_nm", "lifetime_ns", "t_max_ns", "t_step_ns"});
        c.number(j, p, "cavity_fwhm_nm", cfg.inhom.cavity_fwhm_nm, 1e-9, 1e3);
        c.number(j, p, "fwhm_nm", cfg.inhom.fwhm_nm, 0.0, 1e3);
        c.optional_number(j, p, "center_nm", cfg.inhom.center_nm, 1.0, 1e5);
        c.number(j, p, "lifetime_ns", cfg.inhom.lifetime_ns, 1e-9, 1e9);
        c.number(j, p, "t_max_ns", cfg.inhom.t_max_ns, 1e-9, 1e9);
        c.number(j, p, "t_step_ns", cfg.inhom.t_step_ns, 1e-9, 1e9);
    }

    if (doc.contains("data") && c.is_object(doc["data"], "$.data")) {
        const auto& j = doc["data"];
        c.allow(j, "$.data", {"saturation", "decay", "polarization"});
        c.file(j, "$.data", "saturation", base, cfg.data.saturation);
        c.file(j, "$.data", "decay", base, cfg.data.decay);
        c.file(j, "$.data", "polarization", base, cfg.data.polarization);
    }

    if (!c.problems.empty()) throw ValidationError(c.problems);
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError({"config: cannot open " + path.string()});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

} // namespace zplcav
