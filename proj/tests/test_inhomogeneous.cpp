#include <catch_amalgamated.hpp>

#include <cmath>

#include "zplcav/analysis.hpp"
#include "zplcav/inhomogeneous.hpp"

using namespace zplcav;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Lorentzian F_ZPL tuning curve, 0.7 nm wide.
double lorentz_curve(double l) { return 0.3 / (1.0 + 4.0 * std::pow((l - 637.0) / 0.7, 2)); }

InhomogeneousModel model(double fwhm, std::function<double(double)> f = lorentz_curve) {
    return {637.0, fwhm, std::move(f)};
}

double sum_weights(const InhomNodes& n) {
    double s = 0.0;
    for (double w : n.weight) s += w;
    return s;
}

} // namespace

TEST_CASE("distribution is normalized") {
    for (double fwhm : {0.05, 0.5, 3.0}) CHECK_THAT(sum_weights(inhom_nodes(model(fwhm))), WithinAbs(1.0, 1e-9));
}

TEST_CASE("delta distribution") {
    const auto n = inhom_nodes(model(0.0));
    REQUIRE(n.f.size() == 1);
    CHECK(f_inhom(n) == lorentz_curve(637.0));
    const double g0 = 1.0 / 30.8;
    const std::vector<double> t{0.0, 10.0, 50.0};
    const auto i = decay_curve(n, g0, t);
    for (std::size_t k = 0; k < t.size(); ++k) CHECK_THAT(i[k], WithinRel(std::exp(-g0 * 1.3 * t[k]), 1e-14));
}

TEST_CASE("no cavity emission") {
    const auto m = model(0.5, [](double) { return 0.0; });
    CHECK_THROWS_AS(f_inhom(m), DegenerateError);
    const std::vector<double> t{0.0, 5.0, 40.0};
    const auto i = decay_curve(m, 0.05, t);
    for (std::size_t k = 0; k < t.size(); ++k) CHECK_THAT(i[k], WithinRel(std::exp(-0.05 * t[k]), 1e-14));
}

TEST_CASE("constant enhancement") { CHECK_THAT(f_inhom(model(0.5, [](double) { return 0.42; })), WithinRel(0.42, 1e-12)); }

TEST_CASE("f_inhom against a dense trapezoid oracle") {
    const auto m = model(0.5);
    const Window w = m.window();
    const int n = 400000;
    const double h = w.width() / n;
    double num = 0.0, den = 0.0, mean = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double l = w.lo + k * h;
        const double c = (k == 0 || k == n) ? 0.5 : 1.0;
        const double g = m.density(l), f = lorentz_curve(l);
        num += c * g * f * f;
        den += c * g * f;
        mean += c * g * f * h;
    }
    const double fi = f_inhom(m);
    CHECK_THAT(fi, WithinRel(num / den, 1e-6));
    // Jensen: E[F^2] / E[F] >= E[F].
    CHECK(fi >= mean);
    CHECK(fi < lorentz_curve(637.0));
}

TEST_CASE("closed form matches the initial decay slope") {
    const auto r = f_inhom_vs_slope_consistency(model(0.5), 1.0 / 30.8);
    CHECK(r.consistent);
    CHECK(r.relative_discrepancy < 1e-3);

    // Strongly bimodal ensemble built by hand.
    InhomNodes n;
    n.lambda = {636.0, 638.0};
    n.weight = {0.7, 0.3};
    n.f = {0.05, 4.0};
    const auto b = f_inhom_vs_slope_consistency(n, 1.0 / 30.8);
    CHECK_THAT(b.f_inhom, WithinRel((0.7 * 0.0025 + 0.3 * 16.0) / (0.7 * 0.05 + 0.3 * 4.0), 1e-12));
    CHECK(b.consistent);
}

TEST_CASE("narrowing the distribution approaches the delta limit") {
    CHECK_THAT(f_inhom(model(1e-4)), WithinRel(f_inhom(model(0.0)), 1e-6));
    double prev = 0.0;
    for (double fwhm : {2.0, 1.0, 0.5, 0.1}) {
        const double v = f_inhom(model(fwhm));
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("decay curve shape") {
    const auto t = uniform_grid(0.0, 150.0, 0.5);
    const auto i = decay_curve(model(0.5), 1.0 / 30.8, t);
    CHECK(i.front() == 1.0);
    for (std::size_t k = 1; k < i.size(); ++k) {
        CHECK(i[k] > 0.0);
        CHECK(i[k] <= i[k - 1]);
    }
    CHECK_THROWS_AS(decay_curve(model(0.5), 1.0 / 30.8, std::vector<double>{}), DomainError);
    CHECK_THROWS_AS(decay_curve(model(0.5), 1.0 / 30.8, std::vector<double>{1.0, 0.5}), DomainError);
    CHECK_THROWS_AS(decay_curve(model(0.5), 0.0, t), DomainError);
}

TEST_CASE("broad ensemble decays non-exponentially") {
    // Wide spread of enhancements so the curvature is visible.
    const auto m = model(2.0, [](double l) { return 3.0 / (1.0 + 4.0 * std::pow((l - 637.0) / 0.7, 2)); });
    const double g0 = 1.0 / 30.8;
    const auto t = uniform_grid(0.0, 150.0, 0.5);
    const auto i = decay_curve(m, g0, t);
    const double early = -std::log(i[1] / i[0]) / (t[1] - t[0]);
    const double late = -std::log(i.back() / i[i.size() - 2]) / (t[1] - t[0]);
    CHECK(early > 1.2 * late);

    std::vector<DataPoint> d;
    for (std::size_t k = 0; k < t.size(); ++k) d.push_back({t[k], i[k]});
    const auto fit = fit_exponential(d, false);
    CHECK(fit.tau > 30.8 / 4.0);
    CHECK(fit.tau < 30.8);
}

TEST_CASE("model validation") {
    CHECK_THROWS_AS(inhom_nodes({637.0, 0.5, {}}), DomainError);
    CHECK_THROWS_AS(inhom_nodes(model(-1.0)), DomainError);
    CHECK_THROWS_AS(inhom_nodes(model(0.5, [](double) { return -1.0; })), DomainError);
}
