#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "smpdep/quadrature.hpp"

using namespace smpdep;

TEST_CASE("polynomials are exact") {
    auto r = integrate_adaptive([](double x) { return x * x; }, 0.0, 1.0);
    REQUIRE_THAT(r.value, Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-14));
    REQUIRE(r.intervals == 1);
}

TEST_CASE("smooth transcendental integrands") {
    auto s = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, M_PI);
    REQUIRE_THAT(s.value, Catch::Matchers::WithinRel(2.0, 1e-12));

    auto e = integrate_adaptive([](double x) { return std::exp(-x); }, 0.0, 50.0);
    REQUIRE_THAT(e.value, Catch::Matchers::WithinRel(-std::expm1(-50.0), 1e-12));

    // Long truncated tail with most mass near the origin, like the
    // kernel integrands.
    auto k = integrate_adaptive([](double x) { return 100.0 * std::exp(-100.0 * x); },
                                0.0, 300.0);
    REQUIRE_THAT(k.value, Catch::Matchers::WithinRel(1.0, 1e-10));
}

TEST_CASE("rel_tol is honored") {
    QuadratureSettings s;
    s.rel_tol = 1e-12;
    auto r = integrate_adaptive([](double x) { return std::exp(-x) * std::cos(3.0 * x); },
                                0.0, 30.0, s);
    // Analytic: integral of e^{-x} cos(3x) = (1 - e^{-T}(cos 3T - 3 sin 3T)) / 10 at T = 30.
    double expect = (1.0 - std::exp(-30.0) * (std::cos(90.0) - 3.0 * std::sin(90.0))) / 10.0;
    REQUIRE_THAT(r.value, Catch::Matchers::WithinRel(expect, 1e-11));
}

TEST_CASE("interval cap raises instead of spinning") {
    QuadratureSettings s;
    s.rel_tol = 1e-14;
    s.max_intervals = 4;
    REQUIRE_THROWS_AS(
        integrate_adaptive([](double x) { return x < 0.337 ? 1.0 : std::sin(40.0 * x); },
                           0.0, 10.0, s),
        NumericalError);
}

TEST_CASE("degenerate interval integrates to zero") {
    auto r = integrate_adaptive([](double) { return 1.0; }, 2.0, 2.0);
    REQUIRE(r.value == 0.0);
}
