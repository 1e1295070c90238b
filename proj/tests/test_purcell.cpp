#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "zplcav/purcell.hpp"

using namespace zplcav;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const double kSplitNm = 637.0 - ev_to_wavelength(wavelength_to_ev(637.0) + 1.5e-3);

EmitterModel paper_model(double dw = 0.044, double n2 = 0.44) {
    std::vector<GaussianPeak> zpl{{637.0 - kSplitNm, 0.4, n2 * dw}, {637.0, 0.4, (1.0 - n2) * dw}};
    return EmitterModel(zpl, phonon_replicas(637.0, dw), dw, {634.0, 640.0});
}

const std::vector<double>& paper_grid() {
    static const auto g = uniform_grid(620.0, 840.0, 0.005);
    return g;
}

ModeFilter filter(double lambda, double linewidth, double fmax = 9.2) { return {lambda, lambda / linewidth, fmax}; }

std::vector<std::size_t> local_maxima(const std::vector<double>& v) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i)
        if (v[i] > v[i - 1] && v[i] >= v[i + 1]) out.push_back(i);
    return out;
}

} // namespace

TEST_CASE("Lorentzian filter") {
    const auto f = filter(637.0, 0.7);
    CHECK_THAT(lorentzian_enhancement(637.0, f, 0.8), WithinAbs(0.8 * 9.2, 1e-12));
    CHECK_THAT(f.shape(637.0 * (1.0 + 0.5 / f.q_factor)), WithinAbs(0.5, 1e-12));
    // Cross-talk of the doublet through a 0.7 nm line: 1 / (1 + 4 (0.49/0.7)^2).
    CHECK_THAT(f.shape(637.0 - kSplitNm), WithinAbs(1.0 / (1.0 + 4.0 * std::pow(kSplitNm / 0.7, 2)), 1e-3));
    CHECK_THROWS_AS(lorentzian_enhancement(637.0, {637.0, 0.0, 1.0}, 1.0), DomainError);
}

TEST_CASE("axial spectrum with equal overlaps is the free spectrum") {
    const auto m = paper_model();
    const auto ax = s_axial(m, {0.7, 0.7}, paper_grid());
    const auto full = synthesize_spectrum(m, paper_grid());
    for (std::size_t i = 0; i < paper_grid().size(); i += 37)
        CHECK_THAT(ax.density()[i], WithinAbs(full.density()[i], 1e-12));
}

TEST_CASE("zero overlap removes a peak") {
    const auto m = paper_model();
    const auto ax = s_axial(m, {0.0, 0.9}, paper_grid());
    const EmitterModel only3({{637.0, 0.4, 0.044}}, phonon_replicas(637.0, 0.044), 0.044, {634.0, 640.0});
    const auto ref = synthesize_spectrum(only3, paper_grid());
    for (std::size_t i = 0; i < paper_grid().size(); i += 11)
        CHECK_THAT(ax.density()[i], WithinAbs(ref.density()[i], 1e-12));
}

TEST_CASE("axial weights follow n xi") {
    // Widely split doublet so the peak heights are the weights.
    const EmitterModel m({{630.0, 0.4, 0.5}, {645.0, 0.4, 0.5}}, ReplicaPsb{}, 1.0, {625.0, 650.0});
    const auto grid = uniform_grid(625.0, 650.0, 0.01);
    const auto ax = s_axial(m, {0.826, 0.47}, grid);
    CHECK_THAT(ax.at(630.0) / ax.at(645.0), WithinRel(0.826 / 0.47, 1e-9));
}

TEST_CASE("factorized and per-dipole sums agree") {
    const ZplCoupling c(paper_model(), {0.604, 0.826}, paper_grid());
    for (double l : {635.0, 636.5, 637.0, 638.2}) {
        const auto f = filter(l, 0.7);
        CHECK_THAT(c.f_zpl(f), WithinRel(c.f_zpl_per_dipole(f), 1e-10));
    }
}

TEST_CASE("narrow line on resonance sees the full Purcell factor") {
    const auto grid = uniform_grid(630.0, 644.0, 0.001);
    const EmitterModel narrow({{637.0, 0.01, 1.0}}, ReplicaPsb{}, 1.0, {634.0, 640.0});
    CHECK_THAT(f_zpl(narrow, {1.0}, filter(637.0, 0.7), grid), WithinRel(9.2, 1e-3));

    const auto g2 = uniform_grid(620.0, 840.0, 0.001);
    const EmitterModel withpsb({{637.0, 0.01, 0.044}}, phonon_replicas(637.0, 0.044), 0.044, {634.0, 640.0});
    CHECK_THAT(f_zpl(withpsb, {1.0}, filter(637.0, 0.7), g2), WithinRel(9.2 * 0.044, 0.02));
}

TEST_CASE("F_ZPL is linear in F_max and grows with DW") {
    const ZplCoupling c(paper_model(), {0.604, 0.826}, paper_grid());
    CHECK_THAT(c.f_zpl(filter(637.0, 0.7, 18.4)), WithinRel(2.0 * c.f_zpl(filter(637.0, 0.7)), 1e-12));
    double prev = 0.0;
    for (double dw : {0.02, 0.044, 0.1, 0.3}) {
        const double v = f_zpl(paper_model(dw), {0.604, 0.826}, filter(637.0, 0.7), paper_grid());
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("cavity spectrum normalization") {
    const ZplCoupling c(paper_model(), {0.604, 0.826}, paper_grid());
    const auto f = filter(636.8, 0.7);
    CHECK_THAT(c.cavity_spectrum(f).integral(), WithinAbs(1.0, 1e-9));
    CHECK_THAT(c.cavity_spectrum(f, false).integral(), WithinRel(c.f_zpl(f) / (f.f_max * c.weight_sum()), 1e-12));
}

TEST_CASE("wide cavity line passes both doublet peaks") {
    const ZplCoupling c(paper_model(), {1.0, 1.0}, paper_grid());
    const auto s = c.cavity_spectrum(filter(636.75, 5.0));
    std::vector<double> zpl;
    std::vector<double> wl;
    for (std::size_t i = 0; i < paper_grid().size(); ++i)
        if (paper_grid()[i] > 635.5 && paper_grid()[i] < 638.0) {
            wl.push_back(paper_grid()[i]);
            zpl.push_back(s.density()[i]);
        }
    const auto mx = local_maxima(zpl);
    REQUIRE(mx.size() == 2);
    CHECK_THAT(wl[mx[1]] - wl[mx[0]], WithinAbs(kSplitNm, 0.05));
}

TEST_CASE("tuning a narrow line resolves the doublet") {
    const ZplCoupling c(paper_model(), {1.0, 1.0}, paper_grid());
    const auto fs = filter_sweep({635.5, 638.0}, 0.005, 637.0 / 0.1, 9.2);
    const auto scan = tuning_scan(c, fs);
    const auto mx = local_maxima(scan.f_zpl);
    REQUIRE(mx.size() == 2);
    // Overlap of the two lines pulls the maxima slightly together.
    const double sep = scan.lambda_cav[mx[1]] - scan.lambda_cav[mx[0]];
    CHECK(sep <= kSplitNm);
    CHECK_THAT(sep, WithinAbs(kSplitNm, 0.07));
    CHECK(scan.spectra.size() == fs.size());
    CHECK_THROWS_AS(tuning_scan(c, std::vector<ModeFilter>{fs[3], fs[2]}), DomainError);
}

TEST_CASE("single line tuning profile is symmetric") {
    const auto grid = uniform_grid(630.0, 644.0, 0.005);
    const EmitterModel single({{637.0, 0.4, 1.0}}, ReplicaPsb{}, 1.0, {634.0, 640.0});
    const ZplCoupling c(single, {1.0}, grid);
    for (double d : {0.2, 0.5, 1.0, 2.0})
        CHECK_THAT(c.f_zpl(filter(637.0 - d, 0.7)), WithinRel(c.f_zpl(filter(637.0 + d, 0.7)), 2e-3));
}

TEST_CASE("detuning suppresses the ZPL rate") {
    const ZplCoupling c(paper_model(), {0.604, 0.826}, paper_grid());
    const auto best = optimal_tuning(c, {635.0, 639.0}, 637.0 / 0.7, 9.2);
    CHECK(best.lambda_cav > 636.4);
    CHECK(best.lambda_cav < 637.2);
    CHECK(best.f_zpl / c.f_zpl(filter(best.lambda_cav + 3.0, 0.7)) > 10.0);
}

TEST_CASE("effective Q, peak enhancement and total rate") {
    CHECK_THAT(q_eff(637.0, 0.7, 0.4), WithinAbs(579.1, 0.1));
    CHECK_THAT(q_eff(637.0, 0.3, 0.0), WithinAbs(2123.3, 0.1));
    CHECK(q_eff(637.0, 0.3, 0.4) < q_eff(637.0, 0.3, 0.0));
    CHECK_THAT(peak_enhancement(0.25, 0.044, 0.56), WithinAbs(10.1, 0.1));
    CHECK_THAT(total_rate(0.25, 0.93, 0.044), WithinAbs(1.139, 0.001));
    CHECK_THAT(total_rate(0.0, 1.0, 0.044), WithinAbs(0.956, 1e-12));
    CHECK_THROWS_AS(total_rate(0.25, 0.93, 1.0), DomainError);
    CHECK_THROWS_AS(peak_enhancement(0.25, 0.044, 0.0), DomainError);
}

TEST_CASE("coupling input errors") {
    CHECK_THROWS_AS(ZplCoupling(paper_model(), {0.6}, paper_grid()), ConfigurationError);
    CHECK_THROWS_AS(ZplCoupling(paper_model(), {0.6, 1.2}, paper_grid()), DomainError);
    const ZplCoupling c(paper_model(), {0.604, 0.826}, paper_grid());
    CHECK_THROWS_AS(c.f_zpl(filter(637.0, 0.01)), ResolutionError);
    CHECK_THROWS_AS(c.f_zpl(filter(619.0, 0.7)), DomainError);
}

TEST_CASE("grid refinement leaves F_ZPL unchanged") {
    const auto coarse = uniform_grid(620.0, 840.0, 0.01);
    const auto fine = uniform_grid(620.0, 840.0, 0.005);
    const auto f = filter(637.0, 0.7);
    const double a = f_zpl(paper_model(), {0.604, 0.826}, f, coarse);
    const double b = f_zpl(paper_model(), {0.604, 0.826}, f, fine);
    CHECK(std::abs(a - b) / b < 1e-4);
}

TEST_CASE("sideband estimate of a flat spectrum is one") {
    const auto wl = uniform_grid(640.0, 800.0, 0.01);
    const SampledSpectrum flat(wl, std::vector<double>(wl.size(), 1.0));
    const std::vector<CavityMode> modes{{3, 4, 0, 0, 700.0, 0.7, 1.0, false}, {3, 4, 1, 0, 690.0, 0.7, 1.0, true}};
    CHECK_THAT(estimate_f_psb(flat, modes, 1.0), WithinAbs(1.0, 1e-9));
    CHECK_THAT(estimate_f_psb(flat, {}, 1.0), WithinAbs(1.0, 1e-12));
}
