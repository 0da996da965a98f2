#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "pqosc/errors.hpp"
#include "pqosc/model.hpp"
#include "pqosc/spectral.hpp"

namespace pqosc {

/// One solution of the damped integro-differential equation, sampled with its
/// first derivative. Derivative values come from the solver state, never from
/// differencing.
struct GleSolution {
    std::vector<double> y, dy;
    double h = 0.0;

    std::size_t n_points() const { return y.size(); }
};

/// Second-order product-integration (trapezoid) march for
///   y'' + c y' + int_0^s k(s-u) y'(u) du + k(s) y(0) + w2(s) y = 0
/// with k the smooth kernel part and c the local (delta) coefficient.
/// Each step solves the scalar implicit equation exactly.
inline GleSolution solve_gle(const MemoryKernel& kernel,
                             const std::vector<double>& omega_sq, double h,
                             double y0, double dy0) {
    const std::size_t np = omega_sq.size();
    GleSolution sol;
    sol.h = h;
    sol.y.resize(np);
    sol.dy.resize(np);
    if (np == 0) return sol;

    const bool memory = kernel.has_smooth();
    std::vector<double> ks(memory ? np : 1, 0.0);
    if (memory)
        for (std::size_t j = 0; j < np; ++j) ks[j] = kernel.smooth(h * double(j));
    const double k0 = memory ? ks[0] : 0.0;
    const double c = kernel.local_coeff;

    sol.y[0] = y0;
    sol.dy[0] = dy0;
    double a_prev = -c * dy0 - (memory ? k0 * y0 : 0.0) - omega_sq[0] * y0;
    for (std::size_t i = 1; i < np; ++i) {
        // known part of the memory integral at s_i (trapezoid, new point split off)
        double hist = 0.0;
        if (memory) {
            hist = 0.5 * ks[i] * sol.dy[0];
            for (std::size_t k = 1; k < i; ++k) hist += ks[i - k] * sol.dy[k];
            hist *= h;
        }
        const double w2 = omega_sq[i];
        const double rhs = sol.dy[i - 1] + 0.5 * h * a_prev -
                           0.5 * h * (hist + (memory ? ks[i] * y0 : 0.0) +
                                      w2 * (sol.y[i - 1] + 0.5 * h * sol.dy[i - 1]));
        const double denom = 1.0 + 0.5 * h * c + 0.25 * h * h * (memory ? k0 : 0.0) +
                             0.25 * h * h * w2;
        const double v = rhs / denom;
        sol.dy[i] = v;
        sol.y[i] = sol.y[i - 1] + 0.5 * h * (sol.dy[i - 1] + v);
        a_prev = -c * v - (hist + (memory ? (0.5 * h * k0 * v + ks[i] * y0) : 0.0)) -
                 w2 * sol.y[i];
    }
    return sol;
}

/// The two damped fundamental solutions phi1 (0, 1) and phi2 (1, 0) on the
/// full grid, with an optional step-halving self-check.
struct RFundamental {
    GleSolution phi1, phi2;
    double convergence = 0.0;   // relative step-halving change, 0 if unchecked
};

inline RFundamental solve_r_fundamental(const PhysicalParams& p, const DriveSpec& drive,
                                        const MemoryKernel& kernel,
                                        const TimeGrid& grid,
                                        bool convergence_check = true,
                                        double convergence_fail = 1e-3) {
    const std::size_t np = grid.n_points();
    const double h = grid.h();
    std::vector<double> w2(np);
    for (std::size_t i = 0; i < np; ++i) w2[i] = drive.omega_sq(grid.time(i), p);

    RFundamental rf;
    rf.phi1 = solve_gle(kernel, w2, h, 0.0, 1.0);
    rf.phi2 = solve_gle(kernel, w2, h, 1.0, 0.0);

    if (convergence_check) {
        std::vector<double> w2f(2 * grid.n_steps + 1);
        for (std::size_t i = 0; i < w2f.size(); ++i)
            w2f[i] = drive.omega_sq(0.5 * h * double(i), p);
        const GleSolution f1 = solve_gle(kernel, w2f, 0.5 * h, 0.0, 1.0);
        const GleSolution f2 = solve_gle(kernel, w2f, 0.5 * h, 1.0, 0.0);
        double scale = 0.0, diff = 0.0;
        for (std::size_t i = 0; i < np; ++i) {
            scale = std::max({scale, std::abs(rf.phi1.y[i]), std::abs(rf.phi2.y[i])});
            diff = std::max({diff, std::abs(rf.phi1.y[i] - f1.y[2 * i]),
                             std::abs(rf.phi2.y[i] - f2.y[2 * i])});
        }
        rf.convergence = diff / std::max(scale, 1e-300);
        if (rf.convergence > convergence_fail) {
            std::ostringstream os;
            os << "fundamental-solution step-halving change " << rf.convergence
               << " exceeds " << convergence_fail << "; refine grid.n_steps";
            throw NumericalError(os.str());
        }
    }
    return rf;
}

/// Anti-damped fundamental solutions for the backward path variable, obtained
/// by time reversal: y(sigma) = x(t - sigma) satisfies the damped equation
/// with the frequency profile reversed about t. Sampled forward in s on [0, t].
struct XFundamental {
    GleSolution phi1x, phi2x;   // (0,1) and (1,0) at s = 0
    std::size_t t_index = 0;
};

inline XFundamental solve_x_fundamental(const MemoryKernel& kernel,
                                        const std::vector<double>& omega_sq_grid,
                                        double h, std::size_t t_index) {
    const std::size_t n = t_index;
    std::vector<double> w2r(n + 1);
    for (std::size_t j = 0; j <= n; ++j) w2r[j] = omega_sq_grid[n - j];

    const GleSolution ya = solve_gle(kernel, w2r, h, 0.0, 1.0);
    const GleSolution yb = solve_gle(kernel, w2r, h, 1.0, 0.0);

    // x(s) = a*ya(t-s) + b*yb(t-s); initial conditions at s = 0 are conditions
    // at sigma = t: x(0) = y(t), x'(0) = -y'(t)
    const double det = ya.y[n] * yb.dy[n] - yb.y[n] * ya.dy[n];
    double scale = 0.0;
    for (std::size_t j = 0; j <= n; ++j)
        scale = std::max({scale, std::abs(ya.y[j]), std::abs(yb.y[j])});
    if (std::abs(det) < 1e-10 * std::max(scale * scale, 1e-300))
        throw NumericalError("anti-damped fundamental system ill-conditioned "
                             "(time-reversal combination nearly singular)");

    XFundamental xf;
    xf.t_index = t_index;
    // phi1x: x(0) = 0, x'(0) = 1  ->  y(t) = 0, y'(t) = -1
    const double a1 = yb.y[n] / det, b1 = -ya.y[n] / det;
    // phi2x: x(0) = 1, x'(0) = 0  ->  y(t) = 1, y'(t) = 0
    const double a2 = yb.dy[n] / det, b2 = -ya.dy[n] / det;
    xf.phi1x.h = xf.phi2x.h = h;
    xf.phi1x.y.resize(n + 1);
    xf.phi1x.dy.resize(n + 1);
    xf.phi2x.y.resize(n + 1);
    xf.phi2x.dy.resize(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        const std::size_t rj = n - j;
        xf.phi1x.y[j] = a1 * ya.y[rj] + b1 * yb.y[rj];
        xf.phi1x.dy[j] = -(a1 * ya.dy[rj] + b1 * yb.dy[rj]);
        xf.phi2x.y[j] = a2 * ya.y[rj] + b2 * yb.y[rj];
        xf.phi2x.dy[j] = -(a2 * ya.dy[rj] + b2 * yb.dy[rj]);
    }
    return xf;
}

/// Boundary-value data for one snapshot time t: the backward-path weights
/// v1, v2 sampled on [0, t] and the forward-path scalars in the grouped,
/// caustic-regular form chi = phi1(t), phi2(t), dphi1(t), dphi2(t) and the
/// Wronskian combination wtilde = dphi1(t) phi2(t) - phi1(t) dphi2(t).
struct VUAssembly {
    std::size_t t_index = 0;
    double h = 0.0;
    Eigen::VectorXd v1, v2;
    double chi = 0.0, phi2_t = 0.0, dphi1_t = 0.0, dphi2_t = 0.0, wtilde = 0.0;
    double chi_x = 0.0;         // phi1x(t), the backward-path caustic scale

    double udot2_0() const { return 1.0 / chi; }
    double udot1_0() const { return -phi2_t / chi; }
    double udot2_t() const { return dphi1_t / chi; }
    double udot1_t() const { return dphi2_t - phi2_t / chi * dphi1_t; }
};

inline VUAssembly assemble_vu(const RFundamental& rf, const XFundamental& xf,
                              double caustic_tol = 1e-8) {
    const std::size_t n = xf.t_index;
    VUAssembly a;
    a.t_index = n;
    a.h = rf.phi1.h;

    double max_phi1 = 0.0, max_phi1x = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
        max_phi1 = std::max(max_phi1, std::abs(rf.phi1.y[j]));
        max_phi1x = std::max(max_phi1x, std::abs(xf.phi1x.y[j]));
    }
    a.chi = rf.phi1.y[n];
    a.chi_x = xf.phi1x.y[n];
    const double t = a.h * double(n);
    if (std::abs(a.chi) < caustic_tol * max_phi1 ||
        std::abs(a.chi_x) < caustic_tol * max_phi1x) {
        std::ostringstream os;
        os << "caustic at t = " << t
           << ": fundamental solution vanishes, normalization diverges; "
           << "move the snapshot off the focal time";
        throw NumericalError(os.str());
    }
    a.phi2_t = rf.phi2.y[n];
    a.dphi1_t = rf.phi1.dy[n];
    a.dphi2_t = rf.phi2.dy[n];
    a.wtilde = a.dphi1_t * a.phi2_t - a.chi * a.dphi2_t;

    a.v1.resize(n + 1);
    a.v2.resize(n + 1);
    const double ratio = xf.phi2x.y[n] / a.chi_x;
    for (std::size_t j = 0; j <= n; ++j) {
        a.v1[j] = xf.phi2x.y[j] - ratio * xf.phi1x.y[j];
        a.v2[j] = xf.phi1x.y[j] / a.chi_x;
    }
    return a;
}

} // namespace pqosc
