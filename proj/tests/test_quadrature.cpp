#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "zplcav/quadrature.hpp"

using namespace zplcav;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("five-point rule matches tabulated nodes and weights") {
    const auto r = gauss_legendre(5);
    // Abramowitz & Stegun table 25.4
    CHECK_THAT(r.nodes[4], WithinAbs(0.906179845938664, 1e-14));
    CHECK_THAT(r.nodes[3], WithinAbs(0.538469310105683, 1e-14));
    CHECK_THAT(r.nodes[2], WithinAbs(0.0, 1e-15));
    CHECK_THAT(r.weights[4], WithinAbs(0.236926885056189, 1e-14));
    CHECK_THAT(r.weights[3], WithinAbs(0.478628670499366, 1e-14));
    CHECK_THAT(r.weights[2], WithinAbs(0.568888888888889, 1e-14));
}

TEST_CASE("n-point rule is exact to degree 2n-1") {
    for (int n : {1, 2, 7, 16, 64}) {
        const auto r = gauss_legendre(n);
        double wsum = 0.0;
        for (double w : r.weights) wsum += w;
        CHECK_THAT(wsum, WithinAbs(2.0, 1e-13));
        for (int k = 0; k <= 2 * n - 1; k += (n > 8 ? 7 : 1)) {
            double s = 0.0;
            for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
            const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
            CHECK_THAT(s, WithinAbs(exact, 1e-12));
        }
    }
}

TEST_CASE("order below one is rejected") { CHECK_THROWS_AS(gauss_legendre(0), DomainError); }

TEST_CASE("adaptive rule integrates a narrow Lorentzian to its arctangent") {
    const double g = 0.01;
    auto f = [g](double x) { return std::array<double, 1>{g / (x * x + g * g)}; };
    const auto q = adaptive_gauss_legendre<1>(f, -1.0, 2.0, 1e-10);
    REQUIRE(q.converged);
    CHECK_THAT(q.value[0], WithinRel(std::atan(2.0 / g) + std::atan(1.0 / g), 1e-9));
}

TEST_CASE("adaptive result agrees with a dense 64-point composite oracle") {
    auto f = [](double x) { return std::array<double, 2>{std::exp(-x * x) * std::cos(5 * x), std::sin(x) * x}; };
    const auto q = adaptive_gauss_legendre<2>(f, -3.0, 4.0, 1e-8);
    const auto oracle = composite_gauss_legendre<2>(f, -3.0, 4.0, 64, gauss_legendre(64));
    CHECK_THAT(q.value[0], WithinAbs(oracle[0], 1e-9));
    CHECK_THAT(q.value[1], WithinAbs(oracle[1], 1e-9));
}

TEST_CASE("empty or reversed interval is rejected") {
    auto f = [](double) { return std::array<double, 1>{1.0}; };
    CHECK_THROWS_AS(adaptive_gauss_legendre<1>(f, 1.0, 1.0), DomainError);
}
