#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "zplcav/errors.hpp"
#include "zplcav/spectrum.hpp"

namespace zplcav {

using cdouble = std::complex<double>;

struct Layer {
    double index = 1.0;
    double thickness_nm = 0.0;
};

// Layers are ordered from the ambient (illuminated) side to the substrate.
struct LayerStack {
    double ambient_index = 1.0;
    std::vector<Layer> layers;
    double substrate_index = 1.0;
};

inline void validate(const LayerStack& s) {
    if (!(s.ambient_index >= 1.0 && s.substrate_index >= 1.0))
        throw DomainError("LayerStack: ambient and substrate indices must be >= 1");
    for (const auto& l : s.layers) {
        if (!(l.index >= 1.0)) throw DomainError("LayerStack: layer index must be >= 1");
        if (!(l.thickness_nm > 0.0)) throw DomainError("LayerStack: layer thickness must be > 0");
    }
}

inline Layer quarter_wave(double index, double lambda0_nm) { return {index, lambda0_nm / (4.0 * index)}; }

// `pairs` repetitions of (high, low) quarter-wave layers, optionally preceded
// on the ambient side by `cap` layers (e.g. a low-index termination).
inline LayerStack quarter_wave_stack(double n_high, double n_low, int pairs, double lambda0_nm,
                                     double ambient_index, double substrate_index,
                                     std::vector<Layer> cap = {}) {
    if (pairs < 0) throw DomainError("quarter_wave_stack: negative pair count");
    LayerStack s{ambient_index, std::move(cap), substrate_index};
    for (int i = 0; i < pairs; ++i) {
        s.layers.push_back(quarter_wave(n_high, lambda0_nm));
        s.layers.push_back(quarter_wave(n_low, lambda0_nm));
    }
    validate(s);
    return s;
}

// Same stack illuminated from the substrate side.
inline LayerStack reversed(const LayerStack& s) {
    LayerStack r{s.substrate_index, s.layers, s.ambient_index};
    std::reverse(r.layers.begin(), r.layers.end());
    return r;
}

// Characteristic matrix of a homogeneous layer at normal incidence. Maps the
// tangential (E, H) at the far boundary to the near boundary.
inline Eigen::Matrix2cd characteristic_matrix(const Layer& l, double wavelength_nm) {
    const double delta = 2.0 * std::numbers::pi * l.index * l.thickness_nm / wavelength_nm;
    const double c = std::cos(delta), s = std::sin(delta);
    const cdouble i(0.0, 1.0);
    Eigen::Matrix2cd m;
    m << c, -i * s / l.index, -i * l.index * s, c;
    return m;
}

struct Reflection {
    cdouble r;
    cdouble t;
    double reflectance = 0.0;
    double transmittance = 0.0;
    double phase = 0.0; // arg(r), radians
};

inline Reflection reflect(const LayerStack& s, double wavelength_nm) {
    validate(s);
    if (!(wavelength_nm > 0.0)) throw DomainError("reflect: wavelength must be > 0");
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
    for (const auto& l : s.layers) m = m * characteristic_matrix(l, wavelength_nm);
    const cdouble b = m(0, 0) + m(0, 1) * s.substrate_index;
    const cdouble c = m(1, 0) + m(1, 1) * s.substrate_index;
    const double n0 = s.ambient_index;
    Reflection out;
    out.r = (n0 * b - c) / (n0 * b + c);
    out.t = 2.0 * n0 / (n0 * b + c);
    out.reflectance = std::norm(out.r);
    out.transmittance = s.substrate_index / n0 * std::norm(out.t);
    out.phase = std::arg(out.r);
    return out;
}

// Lossless mirror with wavelength-independent reflection phase.
struct IdealMirror {
    double phase = std::numbers::pi;
};

inline cdouble reflection_coefficient(const LayerStack& s, double wavelength_nm) { return reflect(s, wavelength_nm).r; }
inline cdouble reflection_coefficient(const IdealMirror& m, double) { return std::polar(1.0, m.phase); }

template <class M>
concept Reflector = requires(const M& m, double wl) {
    { reflection_coefficient(m, wl) } -> std::convertible_to<cdouble>;
};

// Mirrors must reflect at least this much at the evaluation wavelength to count
// as inside their stop band.
inline constexpr double kStopBandMinReflectance = 0.9;

// Phase penetration depth -(lambda0^2 / 4pi) dphi/dlambda, central difference.
template <Reflector M>
double penetration_depth(const M& mirror, double lambda0_nm, double step_nm = 0.01) {
    const cdouble r0 = reflection_coefficient(mirror, lambda0_nm);
    if (std::norm(r0) < kStopBandMinReflectance)
        throw DomainError("penetration_depth: wavelength outside the mirror stop band");
    const cdouble lo = reflection_coefficient(mirror, lambda0_nm - step_nm);
    const cdouble hi = reflection_coefficient(mirror, lambda0_nm + step_nm);
    const double dphi = std::arg(hi / lo);
    return -(lambda0_nm * lambda0_nm / (4.0 * std::numbers::pi)) * dphi / (2.0 * step_nm);
}

// Widest contiguous interval inside `band` where R >= threshold. Edges are
// located on the scan then bisected to 1e-6 nm.
inline std::optional<Window> stop_band(const LayerStack& s, Window band, double threshold, double step_nm = 0.1) {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw DomainError("stop_band: threshold must be in (0, 1]");
    if (!(step_nm > 0.0) || !(band.hi > band.lo)) throw DomainError("stop_band: bad scan parameters");
    const auto grid = uniform_grid(band.lo, band.hi, step_nm);
    std::vector<char> in(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) in[i] = reflect(s, grid[i]).reflectance >= threshold;

    std::optional<std::pair<std::size_t, std::size_t>> best;
    for (std::size_t i = 0; i < grid.size();) {
        if (!in[i]) { ++i; continue; }
        std::size_t j = i;
        while (j + 1 < grid.size() && in[j + 1]) ++j;
        if (!best || grid[j] - grid[i] > grid[best->second] - grid[best->first]) best = {i, j};
        i = j + 1;
    }
    if (!best) return std::nullopt;

    auto edge = [&](double inside, double outside) {
        for (int k = 0; k < 60; ++k) {
            const double mid = 0.5 * (inside + outside);
            (reflect(s, mid).reflectance >= threshold ? inside : outside) = mid;
            if (std::abs(inside - outside) < 1e-6) break;
        }
        return inside;
    };
    Window w{grid[best->first], grid[best->second]};
    if (best->first > 0) w.lo = edge(grid[best->first], grid[best->first - 1]);
    if (best->second + 1 < grid.size()) w.hi = edge(grid[best->second], grid[best->second + 1]);
    return w;
}

struct PairCountChoice {
    int pairs = 0;
    double reflectance = 0.0;
    LayerStack stack;
};

// Pair count in [min_pairs, max_pairs] whose reflectance at lambda0 is closest
// to `target`.
inline PairCountChoice choose_pair_count(double n_high, double n_low, double lambda0_nm, double target,
                                         double ambient_index, double substrate_index,
                                         const std::vector<Layer>& cap = {}, int min_pairs = 5,
                                         int max_pairs = 15) {
    PairCountChoice best;
    double best_err = 2.0;
    for (int p = min_pairs; p <= max_pairs; ++p) {
        auto s = quarter_wave_stack(n_high, n_low, p, lambda0_nm, ambient_index, substrate_index, cap);
        const double r = reflect(s, lambda0_nm).reflectance;
        if (std::abs(r - target) < best_err) {
            best_err = std::abs(r - target);
            best = {p, r, std::move(s)};
        }
    }
    return best;
}

// Mirror / gap / mirror assembly. Both mirrors list their layers starting at
// the gap; their ambient index must equal the gap index. `gap_inserts` are
// layers lying on mirror A inside the gap (e.g. a nanodiamond slab).
struct CavityAssembly {
    LayerStack mirror_a;
    double gap_nm = 0.0;
    LayerStack mirror_b;
    double gap_index = 1.0;
    std::vector<Layer> gap_inserts;
};

struct FieldProfile {
    std::vector<double> positions; // nm; 0 = gap-facing surface of mirror A
    std::vector<double> intensity; // |E|^2, incident amplitude 1 from mirror A's substrate
    std::vector<double> index;
};

// Exact standing-wave field of an assembly illuminated from mirror A's
// substrate at one wavelength.
class StandingWave {
public:
    StandingWave(const CavityAssembly& a, double wavelength_nm) : wavelength_(wavelength_nm) {
        validate(a.mirror_a);
        validate(a.mirror_b);
        if (a.mirror_a.ambient_index != a.gap_index || a.mirror_b.ambient_index != a.gap_index)
            throw DomainError("CavityAssembly: mirror ambient index must equal the gap index");
        double inserts = 0.0;
        for (const auto& l : a.gap_inserts) inserts += l.thickness_nm;
        if (!(a.gap_nm > inserts)) throw DomainError("CavityAssembly: gap must exceed the inserted layers");

        std::vector<Layer> layers(a.mirror_a.layers.rbegin(), a.mirror_a.layers.rend());
        double za = 0.0;
        for (const auto& l : a.mirror_a.layers) za += l.thickness_nm;
        for (const auto& l : a.gap_inserts) layers.push_back(l);
        layers.push_back({a.gap_index, a.gap_nm - inserts});
        layers.insert(layers.end(), a.mirror_b.layers.begin(), a.mirror_b.layers.end());

        stack_ = LayerStack{a.mirror_a.substrate_index, layers, a.mirror_b.substrate_index};
        const Reflection refl = reflect(stack_, wavelength_nm);
        r_ = refl.r;
        t_ = refl.t;
        transmittance_ = refl.transmittance;

        // Forward-propagate (E, H) through each layer from the incidence side.
        Eigen::Vector2cd eh(1.0 + r_, stack_.ambient_index * (1.0 - r_));
        double z = -za;
        for (const auto& l : layers) {
            starts_.push_back(z);
            fields_.push_back(eh);
            eh = characteristic_matrix(l, wavelength_nm).inverse() * eh;
            z += l.thickness_nm;
        }
        end_ = z;
        layers_ = std::move(layers);
    }

    double wavelength() const { return wavelength_; }
    double transmittance() const { return transmittance_; }
    double start() const { return starts_.empty() ? end_ : starts_.front(); }
    double end() const { return end_; }
    std::span<const Layer> layers() const { return layers_; }
    std::span<const double> layer_starts() const { return starts_; }

    double index_at(double z) const {
        if (z < start()) return stack_.ambient_index;
        if (z >= end_) return stack_.substrate_index;
        return layers_[layer_of(z)].index;
    }

    cdouble field(double z) const {
        const double k0 = 2.0 * std::numbers::pi / wavelength_;
        const cdouble i(0.0, 1.0);
        if (z < start()) {
            const double phase = k0 * stack_.ambient_index * (z - start());
            return std::exp(i * phase) + r_ * std::exp(-i * phase);
        }
        if (z >= end_) return t_ * std::exp(i * k0 * stack_.substrate_index * (z - end_));
        const std::size_t j = layer_of(z);
        const Layer& l = layers_[j];
        const double d = k0 * l.index * (z - starts_[j]);
        return std::cos(d) * fields_[j](0) + i * std::sin(d) / l.index * fields_[j](1);
    }

    double intensity(double z) const { return std::norm(field(z)); }

    // Samples every layer at <= pitch spacing, including each boundary once.
    FieldProfile profile(double pitch_nm = 1.0) const {
        if (!(pitch_nm > 0.0)) throw DomainError("StandingWave::profile: pitch must be > 0");
        FieldProfile p;
        for (std::size_t j = 0; j < layers_.size(); ++j) {
            const double t = layers_[j].thickness_nm;
            const auto n = static_cast<std::size_t>(std::ceil(t / pitch_nm - 1e-12));
            for (std::size_t k = 0; k < n; ++k) {
                const double z = starts_[j] + t * static_cast<double>(k) / static_cast<double>(n);
                p.positions.push_back(z);
                p.intensity.push_back(intensity(z));
                p.index.push_back(layers_[j].index);
            }
        }
        p.positions.push_back(end_);
        p.intensity.push_back(intensity(end_));
        p.index.push_back(stack_.substrate_index);
        return p;
    }

private:
    std::size_t layer_of(double z) const {
        auto it = std::upper_bound(starts_.begin(), starts_.end(), z);
        return static_cast<std::size_t>(it - starts_.begin()) - 1;
    }

    double wavelength_;
    LayerStack stack_;
    std::vector<Layer> layers_;
    std::vector<double> starts_;
    std::vector<Eigen::Vector2cd, Eigen::aligned_allocator<Eigen::Vector2cd>> fields_;
    double end_ = 0.0;
    cdouble r_, t_;
    double transmittance_ = 0.0;
};

inline double assembly_transmittance(const CavityAssembly& a, double wavelength_nm) {
    return StandingWave(a, wavelength_nm).transmittance();
}

// Transmission resonance nearest `guess`: scan +-half_window at `step`, then
// golden-section refinement around the best sample.
inline double find_resonance(const CavityAssembly& a, double guess_nm, double half_window_nm = 2.0,
                             double step_nm = 1e-3) {
    const auto grid = uniform_grid(guess_nm - half_window_nm, guess_nm + half_window_nm, step_nm);
    std::vector<double> t(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) t[i] = assembly_transmittance(a, grid[i]);
    const auto imax = static_cast<std::size_t>(std::max_element(t.begin(), t.end()) - t.begin());
    if (imax == 0 || imax + 1 == grid.size() || t[imax] < 2.0 * std::max(t.front(), t.back()))
        throw ResonanceNotFound("find_resonance: no transmission peak within +-" +
                                std::to_string(half_window_nm) + " nm of " + std::to_string(guess_nm));
    double lo = grid[imax - 1], hi = grid[imax + 1];
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = assembly_transmittance(a, x1), f2 = assembly_transmittance(a, x2);
    while (hi - lo > 1e-9) {
        if (f1 > f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = assembly_transmittance(a, x1);
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = assembly_transmittance(a, x2);
        }
    }
    return 0.5 * (lo + hi);
}

struct CavityField {
    double resonance_nm = 0.0;
    FieldProfile profile;
};

// Locates the resonance near `wavelength_nm` and samples its standing wave.
inline CavityField cavity_field_profile(const LayerStack& mirror_a, double gap_nm, const LayerStack& mirror_b,
                                        double wavelength_nm, double pitch_nm = 1.0,
                                        const std::vector<Layer>& gap_inserts = {}) {
    if (pitch_nm > 5.0) throw DomainError("cavity_field_profile: pitch must be <= 5 nm");
    const CavityAssembly a{mirror_a, gap_nm, mirror_b, mirror_a.ambient_index, gap_inserts};
    const double res = find_resonance(a, wavelength_nm);
    return {res, StandingWave(a, res).profile(pitch_nm)};
}

// Strict local maxima of |E|^2 with position strictly inside `region`.
inline int antinode_count(const FieldProfile& p, Window region) {
    int count = 0;
    for (std::size_t i = 1; i + 1 < p.intensity.size(); ++i) {
        if (!(p.positions[i] > region.lo && p.positions[i] < region.hi)) continue;
        if (p.intensity[i] > p.intensity[i - 1] && p.intensity[i] > p.intensity[i + 1]) ++count;
    }
    return count;
}

// Position of the local |E|^2 maximum closest to z (nullopt if none).
inline std::optional<double> nearest_antinode(const FieldProfile& p, double z) {
    std::optional<double> best;
    for (std::size_t i = 1; i + 1 < p.intensity.size(); ++i) {
        if (p.intensity[i] >= p.intensity[i - 1] && p.intensity[i] >= p.intensity[i + 1] &&
            (p.intensity[i] > p.intensity[i - 1] || p.intensity[i] > p.intensity[i + 1])) {
            if (!best || std::abs(p.positions[i] - z) < std::abs(*best - z)) best = p.positions[i];
        }
    }
    return best;
}

// One-dimensional analogue of the field-integral mode volume:
// integral(n^2 |E|^2 dz) / (n^2 |E|^2) at z_dipole, over the sampled region.
inline double effective_field_length(const FieldProfile& p, double z_dipole) {
    if (p.positions.size() < 2) throw DomainError("effective_field_length: empty profile");
    double num = 0.0;
    for (std::size_t i = 1; i < p.positions.size(); ++i) {
        const double a = p.index[i - 1] * p.index[i - 1] * p.intensity[i - 1];
        const double b = p.index[i - 1] * p.index[i - 1] * p.intensity[i];
        num += 0.5 * (a + b) * (p.positions[i] - p.positions[i - 1]);
    }
    auto it = std::lower_bound(p.positions.begin(), p.positions.end(), z_dipole);
    if (it == p.positions.end()) throw DomainError("effective_field_length: dipole outside profile");
    const auto k = static_cast<std::size_t>(it - p.positions.begin());
    const double den = p.index[k] * p.index[k] * p.intensity[k];
    if (!(den > 0.0)) throw DegenerateError("effective_field_length: zero field at dipole");
    return num / den;
}

} // namespace zplcav
