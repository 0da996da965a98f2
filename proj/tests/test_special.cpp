#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pqosc/math/integrate.hpp"
#include "pqosc/math/parallel.hpp"
#include "pqosc/math/special.hpp"

using namespace pqosc;

namespace {

// composite Simpson, used as the brute-force reference throughout
template <class F>
double simpson(F f, double a, double b, int n) {
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

} // namespace

TEST_CASE("power-sum tails anchor at the zeta values") {
    // tail from N = 0 is the full series
    REQUIRE(inv_power_tail(2, 0) ==
            Catch::Approx(1.6449340668482264365).epsilon(1e-14));
    REQUIRE(inv_power_tail(3, 0) ==
            Catch::Approx(1.2020569031595942854).epsilon(1e-14));
    REQUIRE(inv_power_tail(4, 0) ==
            Catch::Approx(1.0823232337111381916).epsilon(1e-14));
    REQUIRE(inv_power_tail(5, 0) ==
            Catch::Approx(1.0369277551433699263).epsilon(1e-14));
    REQUIRE(inv_power_tail(6, 0) ==
            Catch::Approx(1.0173430619844491397).epsilon(1e-14));
}

TEST_CASE("power-sum tails telescope against exact partial sums") {
    for (int k : {2, 3, 4, 5, 6}) {
        for (long N : {1L, 7L, 100L, 5000L}) {
            double seg = 0.0;
            for (long n = N + 1; n <= N + 1000; ++n) seg += std::pow(double(n), -k);
            const double diff = inv_power_tail(k, N) - inv_power_tail(k, N + 1000);
            REQUIRE(diff == Catch::Approx(seg).epsilon(1e-12));
        }
    }
}

TEST_CASE("dilogarithm special values") {
    constexpr double pi = 3.14159265358979323846;
    REQUIRE(dilog(1.0) == Catch::Approx(pi * pi / 6.0).epsilon(1e-14));
    REQUIRE(dilog(0.0) == 0.0);
    const double l2 = std::log(2.0);
    REQUIRE(dilog(0.5) ==
            Catch::Approx(pi * pi / 12.0 - 0.5 * l2 * l2).epsilon(1e-14));
    // series region against direct summation
    double direct = 0.0, term = 0.3;
    for (int n = 1; n < 200; ++n, term *= 0.3) direct += term / double(n) / double(n);
    REQUIRE(dilog(0.3) == Catch::Approx(direct).epsilon(1e-14));
}

TEST_CASE("exponential cell moments reproduce the hat-weighted integrals") {
    // eps is bounded by the Simpson reference, whose relative error grows as
    // (nu * h / n)^4; the closed form itself is exact to machine precision
    const auto check = [](double nu, double a, double h, double eps = 1e-11) {
        double A = 0.0, B = 0.0;
        exp_cell_moments(nu, a, h, A, B);
        const double a_ref = simpson(
            [&](double s) { return std::exp(-nu * s) * (a + h - s) / h; }, a, a + h,
            2000);
        const double b_ref = simpson(
            [&](double s) { return std::exp(-nu * s) * (s - a) / h; }, a, a + h,
            2000);
        REQUIRE(A == Catch::Approx(a_ref).epsilon(eps));
        REQUIRE(B == Catch::Approx(b_ref).epsilon(eps));
        // the two routes cancel differently; roundoff amplifies ~1/(nu h)
        REQUIRE(A + B == Catch::Approx(exp_cell_integral(nu, a, h)).epsilon(1e-11));
    };
    check(3.7, 0.2, 0.05);
    check(150.0, 0.0, 0.02);            // stiff: nu * h = 3
    check(2000.0, 0.01, 0.01, 1e-9);    // very stiff: nu * h = 20
    check(1e-5, 0.3, 0.1);        // series branch: nu * h = 1e-6
    check(9e-4, 1.0, 0.1);        // just below the series threshold
    check(1.1e-3, 1.0, 0.1);      // just above
}

TEST_CASE("sinc is continuous through the series switch") {
    REQUIRE(sinc(0.0) == 1.0);
    REQUIRE(sinc(0.5) == Catch::Approx(std::sin(0.5) / 0.5).epsilon(1e-15));
    REQUIRE(sinc(1.0001e-4) == Catch::Approx(sinc(0.9999e-4)).margin(1e-12));
}

TEST_CASE("trapezoid weights integrate a parabola") {
    const auto w = trapezoid_weights(101, 0.01);
    REQUIRE(w.size() == 101);
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double x = 0.01 * double(i);
        acc += w[i] * x * x;
    }
    REQUIRE(acc == Catch::Approx(1.0 / 3.0).epsilon(1e-4));
}

TEST_CASE("adaptive quadrature handles smooth and kinked integrands") {
    const auto r1 = integrate_adaptive([](double x) { return x * x; }, 0.0, 1.0,
                                       1e-12, 1e-15, 200);
    REQUIRE(r1.value == Catch::Approx(1.0 / 3.0).epsilon(1e-12));

    // |x - 0.3| has a kink; a seeded breakpoint makes it exact
    const auto r2 = integrate_adaptive([](double x) { return std::abs(x - 0.3); },
                                       0.0, 1.0, 1e-12, 1e-15, 400, {0.3});
    REQUIRE(r2.value == Catch::Approx(0.5 * 0.09 + 0.5 * 0.49).epsilon(1e-12));
}

TEST_CASE("oscillatory quadrature of a damped cosine") {
    // int_0^40 e^{-s} cos(w s) ds = (1 - e^{-40}(cos 40w - w sin 40w)) / (1+w^2)
    const double w = 25.0;
    const auto r = integrate_oscillatory(
        [&](double s) { return std::exp(-s) * std::cos(w * s); }, 0.0, 40.0, w,
        1e-12, 1e-15, 4000);
    const double ref =
        (1.0 - std::exp(-40.0) * (std::cos(40.0 * w) - w * std::sin(40.0 * w))) /
        (1.0 + w * w);
    REQUIRE(r.value == Catch::Approx(ref).epsilon(1e-10));
}

TEST_CASE("parallel_for covers the range exactly once and rethrows") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) REQUIRE(h == 1);

    REQUIRE_THROWS_AS(parallel_for(std::size_t(64),
                                   [&](std::size_t i) {
                                       if (i == 13) throw std::runtime_error("boom");
                                   }),
                      std::runtime_error);
}
