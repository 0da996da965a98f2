#pragma once

// Independent reference implementations used only by tests and the built-in
// validation suite. Each one reaches a quantity the main pipeline also
// produces, but by a structurally different route (transform-domain residues,
// frequency-space quadrature, direct ODE integration, stochastic sampling),
// so shared-bug overlap is minimal.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "pqosc/errors.hpp"
#include "pqosc/math/integrate.hpp"
#include "pqosc/math/parallel.hpp"
#include "pqosc/model.hpp"

namespace pqosc::oracles {

// ---------------------------------------------------------------------------
// generic fixed-size RK4
// ---------------------------------------------------------------------------

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N, class F>
inline void rk4_step(const F& f, double s, double h, State<N>& y) {
    State<N> k1, k2, k3, k4, tmp;
    f(s, y, k1);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    f(s + 0.5 * h, tmp, k2);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    f(s + 0.5 * h, tmp, k3);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * k3[i];
    f(s + h, tmp, k4);
    for (std::size_t i = 0; i < N; ++i)
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

// ---------------------------------------------------------------------------
// transform-domain fundamental solutions
// ---------------------------------------------------------------------------

/// Fundamental solutions for the Lorentzian-cutoff friction kernel via
/// partial fractions: both transforms share the cubic
/// p(z) = (z^2 + w0^2)(z + W) + g W z, and
/// phi1 = sum (z_i + W) e^{z_i s} / p'(z_i), phi2 carries an extra z_i.
struct DrudeLaplace {
    std::array<std::complex<double>, 3> root;
    std::array<std::complex<double>, 3> weight;   // (z_i + W) / p'(z_i)

    double phi1(double s) const {
        std::complex<double> v = 0.0;
        for (int i = 0; i < 3; ++i) v += weight[i] * std::exp(root[i] * s);
        return v.real();
    }
    double dphi1(double s) const {
        std::complex<double> v = 0.0;
        for (int i = 0; i < 3; ++i) v += weight[i] * root[i] * std::exp(root[i] * s);
        return v.real();
    }
    double phi2(double s) const { return dphi1(s); }
    double dphi2(double s) const {
        std::complex<double> v = 0.0;
        for (int i = 0; i < 3; ++i)
            v += weight[i] * root[i] * root[i] * std::exp(root[i] * s);
        return v.real();
    }
};

inline DrudeLaplace laplace_drude(double omega0, double gamma, double cutoff) {
    const double W = cutoff;
    // p(z) = z^3 + W z^2 + (w0^2 + g W) z + w0^2 W
    const double c2 = W, c1 = omega0 * omega0 + gamma * W, c0 = omega0 * omega0 * W;
    Eigen::Matrix3d comp = Eigen::Matrix3d::Zero();
    comp(0, 2) = -c0;
    comp(1, 2) = -c1;
    comp(2, 2) = -c2;
    comp(1, 0) = 1.0;
    comp(2, 1) = 1.0;
    Eigen::Vector3cd z = comp.eigenvalues();

    // near-confluent roots: symmetric perturbation keeps the partial-fraction
    // form valid with O(delta^2) evaluation error
    double zmax = 0.0;
    for (int i = 0; i < 3; ++i) zmax = std::max(zmax, std::abs(z(i)));
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (std::abs(z(i) - z(j)) < 1e-7 * zmax) {
                const std::complex<double> mid = 0.5 * (z(i) + z(j));
                const std::complex<double> dir =
                    std::abs(z(i) - z(j)) > 0.0
                        ? (z(i) - z(j)) / std::abs(z(i) - z(j))
                        : std::complex<double>(1.0, 0.0);
                z(i) = mid + 5e-8 * zmax * dir;
                z(j) = mid - 5e-8 * zmax * dir;
            }

    DrudeLaplace d;
    // residues from the factored form: consistent with the (possibly nudged)
    // root set, so sum w_i = 0 and sum w_i z_i = 1 hold structurally
    for (int i = 0; i < 3; ++i) {
        const std::complex<double> zi = z(i);
        const std::complex<double> dp =
            (zi - z((i + 1) % 3)) * (zi - z((i + 2) % 3));
        d.root[i] = zi;
        d.weight[i] = (zi + W) / dp;
    }
    return d;
}

/// Memoryless-limit fundamental solution phi1 = e^{-g s/2} sin(w1 s)/w1.
inline double markovian_phi1(double omega0, double gamma, double s) {
    const double disc = omega0 * omega0 - 0.25 * gamma * gamma;
    const double e = std::exp(-0.5 * gamma * s);
    if (disc > 0.0) {
        const double w1 = std::sqrt(disc);
        return e * std::sin(w1 * s) / w1;
    }
    if (disc < 0.0) {
        const double w1 = std::sqrt(-disc);
        return e * std::sinh(w1 * s) / w1;
    }
    return e * s;
}

inline double markovian_dphi1(double omega0, double gamma, double s) {
    const double disc = omega0 * omega0 - 0.25 * gamma * gamma;
    const double e = std::exp(-0.5 * gamma * s);
    if (disc > 0.0) {
        const double w1 = std::sqrt(disc);
        return e * (std::cos(w1 * s) - 0.5 * gamma * std::sin(w1 * s) / w1);
    }
    if (disc < 0.0) {
        const double w1 = std::sqrt(-disc);
        return e * (std::cosh(w1 * s) - 0.5 * gamma * std::sinh(w1 * s) / w1);
    }
    return e * (1.0 - 0.5 * gamma * s);
}

// ---------------------------------------------------------------------------
// driven classical response
// ---------------------------------------------------------------------------

/// Green-function convolution <q>(t) = (1/m) int_0^t phi1(t-u) E(u) du,
/// evaluated by adaptive quadrature, independent of the time-stepping scheme.
inline double classical_driven_mean(const std::function<double(double)>& phi1,
                                    const std::function<double(double)>& force,
                                    double mass, double t, double osc_freq) {
    if (t <= 0.0) return 0.0;
    const auto f = [&](double u) { return phi1(t - u) * force(u); };
    const QuadResult q = integrate_oscillatory(f, 0.0, t, osc_freq, 1e-11, 1e-14);
    return q.value / mass;
}

inline double classical_driven_momentum(const std::function<double(double)>& dphi1,
                                        const std::function<double(double)>& force,
                                        double t, double osc_freq) {
    if (t <= 0.0) return 0.0;
    const auto f = [&](double u) { return dphi1(t - u) * force(u); };
    const QuadResult q = integrate_oscillatory(f, 0.0, t, osc_freq, 1e-11, 1e-14);
    return q.value;   // m d<q>/dt; the phi1(0) boundary term vanishes
}

// ---------------------------------------------------------------------------
// fluctuation-dissipation equilibrium variances
// ---------------------------------------------------------------------------

struct FdtVariances {
    double qq = 0.0, pp = 0.0;
};

/// <q^2> = (hbar/(pi m)) int coth(hbar beta w / 2) Im chi(w) dw and the
/// momentum analog with an extra w^2 m^2 factor, for the Lorentzian-cutoff
/// susceptibility chi(w) = 1 / (w0^2 - w^2 - i w g W/(W - i w)).
inline FdtVariances fdt_equilibrium_variances(const PhysicalParams& p) {
    const double w0 = p.omega0, g = p.gamma_tb, W = p.cutoff_tb;
    const double hb = p.hbar * p.beta_tb;
    const auto im_chi = [&](double w) {
        const std::complex<double> denom =
            std::complex<double>(w0 * w0 - w * w, 0.0) -
            std::complex<double>(0.0, w) * (g * W / std::complex<double>(W, -w));
        return (1.0 / denom).imag();
    };
    const auto cth = [&](double w) {
        const double x = 0.5 * hb * w;
        if (x > 350.0) return 1.0;
        return 1.0 / std::tanh(x);
    };
    const double whi = 2.0e4 * std::max(w0, W);
    std::vector<double> bp;
    for (double b : {std::max(w0 - 5.0 * g, 1e-12 * w0), w0, w0 + 5.0 * g, 10.0 * W,
                     100.0 * W, 3000.0 * std::max(w0, W)})
        if (b > 0.0 && b < whi) bp.push_back(b);
    std::sort(bp.begin(), bp.end());

    const auto fq = [&](double w) { return cth(w) * im_chi(w); };
    const auto fp = [&](double w) { return cth(w) * im_chi(w) * w * w; };
    const QuadResult iq = integrate_adaptive(fq, 0.0, whi, 1e-11, 0.0, 4000, bp);
    const QuadResult ip = integrate_adaptive(fp, 0.0, whi, 1e-11, 0.0, 4000, bp);

    FdtVariances v;
    v.qq = p.hbar / (M_PI * p.mass) * iq.value;
    // large-w tail of the pp integrand: coth -> 1, Im chi -> g W^2 / w^5
    const double tail = g * W * W / (2.0 * whi * whi);
    v.pp = p.hbar * p.mass / M_PI * (ip.value + tail);
    return v;
}

// ---------------------------------------------------------------------------
// real noise kernel by frequency quadrature
// ---------------------------------------------------------------------------

/// K_re(s) = (1/pi) int J(w) coth(hbar beta w/2) cos(w s) dw for s > 0.
/// Vacuum part is closed-form through exponential integrals,
///   int_0^inf t cos(t x)/(1 + t^2) dt = -(1/2)[e^x Ei(-x) + e^{-x} Ei(x)],
/// thermal part is absolutely convergent quadrature.
inline double k_tb_quadrature(const PhysicalParams& p, double s) {
    if (s <= 0.0)
        throw NumericalError("frequency-quadrature kernel oracle requires s > 0");
    const double g = p.gamma_tb, W = p.cutoff_tb;
    const double x = W * s;
    double vac;
    if (x < 500.0)
        vac = -0.5 * (std::exp(x) * std::expint(-x) + std::exp(-x) * std::expint(x));
    else
        vac = -(1.0 + 6.0 / (x * x)) / (x * x);
    const double k_vac = p.mass * g * W * W / M_PI * vac;

    const double hb = p.hbar * p.beta_tb;
    const auto f = [&](double w) {
        const double e = hb * w;
        const double bose = e > 700.0 ? 0.0 : 2.0 / std::expm1(e);
        return w / (W * W + w * w) * bose * std::cos(w * s);
    };
    const double whi = 80.0 / hb + 5.0 * W;
    const QuadResult q =
        integrate_oscillatory(f, 0.0, whi, s, 1e-11, 1e-16, 4000);
    return k_vac + p.mass * g * W * W / M_PI * q.value;
}

// ---------------------------------------------------------------------------
// memoryless covariance dynamics
// ---------------------------------------------------------------------------

struct CovariancePoint {
    double t = 0.0, qq = 0.0, qp = 0.0, pp = 0.0;
};

/// RK4 integration of the damped covariance equations
///   d qq = 2 qp/m,  d qp = pp/m - m w0^2 qq - g qp,
///   d pp = -2 m w0^2 qp - 2 g pp + 2 m g kT,
/// the high-temperature memoryless limit the full machinery must reproduce.
inline std::vector<CovariancePoint> markovian_covariance(
    double mass, double omega0, double gamma, double kT, double qq0, double qp0,
    double pp0, const std::vector<double>& times, int substeps_per_unit = 400) {
    std::vector<CovariancePoint> out;
    out.reserve(times.size() + 1);
    const auto f = [&](double, const State<3>& y, State<3>& d) {
        d[0] = 2.0 * y[1] / mass;
        d[1] = y[2] / mass - mass * omega0 * omega0 * y[0] - gamma * y[1];
        d[2] = -2.0 * mass * omega0 * omega0 * y[1] - 2.0 * gamma * y[2] +
               2.0 * mass * gamma * kT;
    };
    State<3> y{qq0, qp0, pp0};
    double t = 0.0;
    out.push_back({0.0, y[0], y[1], y[2]});
    const double href = 1.0 / (double(substeps_per_unit) * std::max(omega0, gamma));
    for (double tn : times) {
        if (tn <= t) continue;
        const auto n = std::size_t(std::ceil((tn - t) / href));
        const double h = (tn - t) / double(n);
        for (std::size_t i = 0; i < n; ++i) rk4_step(f, t + h * double(i), h, y);
        t = tn;
        out.push_back({t, y[0], y[1], y[2]});
    }
    return out;
}

// ---------------------------------------------------------------------------
// parametric instability growth rate
// ---------------------------------------------------------------------------

/// Floquet growth rate of x'' + g x' + [w0^2 + a sin(2 w0 s)] x = 0 estimated
/// from the log-slope of the strobed energy envelope. Positive means the
/// principal instability tongue is open; the threshold is a = 2 g w0 (i.e.
/// relative depth h = 2 g / w0). Independent RK4, no memory machinery.
inline double parametric_growth_rate(double omega0, double gamma, double depth,
                                     double t_final, int steps_per_period = 600) {
    const double a = depth * omega0 * omega0;
    const auto f = [&](double s, const State<2>& y, State<2>& d) {
        d[0] = y[1];
        d[1] = -gamma * y[1] -
               (omega0 * omega0 + a * std::sin(2.0 * omega0 * s)) * y[0];
    };
    const double period = M_PI / omega0;   // strobe at the modulation period
    const auto n_periods = std::size_t(std::ceil(t_final / period));
    const double h = period / double(steps_per_period);

    State<2> y{1.0, 0.0};
    std::vector<double> log_e;
    log_e.reserve(n_periods);
    double s = 0.0;
    for (std::size_t k = 0; k < n_periods; ++k) {
        for (int i = 0; i < steps_per_period; ++i) {
            rk4_step(f, s, h, y);
            s += h;
        }
        const double e = y[1] * y[1] + omega0 * omega0 * y[0] * y[0];
        log_e.push_back(0.5 * std::log(std::max(e, 1e-300)));
        // renormalize to dodge overflow/underflow; slope is what matters
        const double r = std::sqrt(std::max(e, 1e-300));
        y[0] /= r;
        y[1] /= r;
        if (k > 0) log_e[k] += log_e[k - 1];
    }
    // least-squares slope over the last 60% of strobe samples
    const std::size_t lo = log_e.size() / 10 * 4;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto nfit = double(log_e.size() - lo);
    for (std::size_t k = lo; k < log_e.size(); ++k) {
        const double xk = period * double(k + 1);
        sx += xk;
        sy += log_e[k];
        sxx += xk * xk;
        sxy += xk * log_e[k];
    }
    return (nfit * sxy - sx * sy) / (nfit * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// classical stochastic sampler
// ---------------------------------------------------------------------------

struct LangevinResult {
    std::vector<double> t, qq, pp;
};

/// Classical Langevin dynamics with the exact exponential memory, embedded as
/// an auxiliary Ornstein-Uhlenbeck pair:
///   z' = -W z + g W q'   (memory force -m z)
///   xi' = -W xi + sqrt(2 W m g W kT) dB   (colored noise, FDT-matched)
/// Starts in the stationary state of the extended system: q, p canonical,
/// z = 0, xi at its stationary variance, no cross-correlations (the joint
/// Lyapunov solution has <q xi> = <p xi> = 0). The fixed seed makes results
/// reproducible bit-for-bit.
inline LangevinResult langevin_drude_classical(double mass, double omega0,
                                               double gamma, double cutoff,
                                               double kT,
                                               const std::vector<double>& times,
                                               std::size_t n_traj,
                                               double dt, std::uint64_t seed = 20260815ULL) {
    const double W = cutoff;
    const double xi_var = mass * gamma * W * kT;
    const double eW = std::exp(-W * dt);
    const double xi_kick = std::sqrt(xi_var * (1.0 - eW * eW));

    std::vector<double> sum_qq(times.size(), 0.0), sum_pp(times.size(), 0.0);
    std::vector<std::vector<double>> part_qq, part_pp;
    const std::size_t workers = std::max<std::size_t>(1, thread_count());
    part_qq.assign(workers, std::vector<double>(times.size(), 0.0));
    part_pp.assign(workers, std::vector<double>(times.size(), 0.0));

    const std::size_t chunk = (n_traj + workers - 1) / workers;
    parallel_for(workers, [&](std::size_t w) {
        const std::size_t lo = w * chunk, hi = std::min(n_traj, lo + chunk);
        for (std::size_t traj = lo; traj < hi; ++traj) {
            std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * (traj + 1));
            std::normal_distribution<double> nd(0.0, 1.0);
            double q = std::sqrt(kT / (mass * omega0 * omega0)) * nd(rng);
            double p = std::sqrt(mass * kT) * nd(rng);
            double z = 0.0;
            double xi = std::sqrt(xi_var) * nd(rng);
            double t = 0.0;
            std::size_t is = 0;
            while (is < times.size()) {
                if (t + 0.5 * dt >= times[is]) {
                    part_qq[w][is] += q * q;
                    part_pp[w][is] += p * p;
                    ++is;
                    continue;
                }
                // semi-implicit: momentum first, with current z and xi
                p += dt * (-mass * omega0 * omega0 * q - mass * z + xi);
                const double v = p / mass;
                q += dt * v;
                z = eW * z + gamma * (1.0 - eW) * v;   // exact cell convolution
                xi = eW * xi + xi_kick * nd(rng);
                t += dt;
            }
        }
    }, workers);
    for (std::size_t w = 0; w < workers; ++w)
        for (std::size_t i = 0; i < times.size(); ++i) {
            sum_qq[i] += part_qq[w][i];
            sum_pp[i] += part_pp[w][i];
        }

    LangevinResult r;
    r.t = times;
    r.qq.resize(times.size());
    r.pp.resize(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        r.qq[i] = sum_qq[i] / double(n_traj);
        r.pp[i] = sum_pp[i] / double(n_traj);
    }
    return r;
}

} // namespace pqosc::oracles
