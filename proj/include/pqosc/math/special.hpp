#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>

namespace pqosc {

/// Tail of the Riemann power sum: sum_{n > N} n^{-k} for integer k >= 2.
/// Euler-Maclaurin about a = N+1; direct summation bridges small N.
inline double inv_power_tail(int k, long N) {
    assert(k >= 2);
    double acc = 0.0;
    // push the expansion point out so the asymptotic part is accurate to ~1e-16
    const long a0 = 32;
    while (N < a0) {
        ++N;
        acc += std::pow(double(N), -k);
    }
    const double a = double(N + 1);
    const double ak = std::pow(a, -k);
    double t = ak * a / (k - 1);          // integral term a^{1-k}/(k-1)
    t += 0.5 * ak;
    t += k * ak / (12.0 * a);
    t -= k * (k + 1.0) * (k + 2.0) * ak / (720.0 * a * a * a);
    t += k * (k + 1.0) * (k + 2.0) * (k + 3.0) * (k + 4.0) * ak / (30240.0 * std::pow(a, 5));
    return acc + t;
}

/// Real dilogarithm Li2(x) for x in [0, 1].
inline double dilog(double x) {
    assert(x >= 0.0 && x <= 1.0);
    constexpr double pi2_6 = 1.6449340668482264365;
    if (x == 1.0) return pi2_6;
    // reflection keeps the series argument <= 1/2
    if (x > 0.5) return pi2_6 - std::log(x) * std::log1p(-x) - dilog(1.0 - x);
    double term = x, acc = 0.0;
    for (int n = 1; n < 80; ++n) {
        acc += term / double(n) / double(n);
        term *= x;
        if (term < 1e-18 * (acc + 1e-300) * n * n) break;
    }
    return acc;
}

/// Cell moments of e^{-nu s} against the linear hat weights of one grid cell
/// [a, a+h]: A = int e^{-nu s} (a+h-s)/h ds, B = int e^{-nu s} (s-a)/h ds.
/// Used to build product-integration ("cell-averaged") tables that keep the
/// trapezoidal quadratures exact for stiff exponentials (nu*h >> 1).
inline void exp_cell_moments(double nu, double a, double h, double& A, double& B) {
    const double x = nu * h;
    const double pre = std::exp(-nu * a) * h;
    if (std::abs(x) < 1e-4) {
        // series of (x-1+e^{-x})/x^2 and (1-(1+x)e^{-x})/x^2
        A = pre * (0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0);
        B = pre * (0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0);
        return;
    }
    const double em = std::expm1(-x);     // e^{-x} - 1, no cancellation
    A = pre * (x + em) / (x * x);
    B = pre * (-em - x * (em + 1.0)) / (x * x);
}

/// Zeroth cell moment of e^{-nu s} over [a, a+h] (plain average * h).
inline double exp_cell_integral(double nu, double a, double h) {
    const double x = nu * h;
    if (std::abs(x) < 1e-4)
        return std::exp(-nu * a) * h * (1.0 - 0.5 * x + x * x / 6.0);
    return std::exp(-nu * a) * (-std::expm1(-x)) / nu;
}

inline double sinc(double x) {
    if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

} // namespace pqosc
