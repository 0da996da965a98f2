#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "pqosc/errors.hpp"
#include "pqosc/math/integrate.hpp"
#include "pqosc/math/parallel.hpp"
#include "pqosc/math/special.hpp"
#include "pqosc/model.hpp"

namespace pqosc {

/// Contact-bath spectral density: Ohmic with algebraic (Drude) cutoff.
inline double spectral_density_tb(double w, const PhysicalParams& p) {
    const double O = p.cutoff_tb;
    return p.mass * p.gamma_tb * w * O * O / (O * O + w * w);
}

/// Radiation-field spectral density: cubic with the same cutoff shape and the
/// renormalized mass in the prefactor.
inline double spectral_density_bb(double w, const PhysicalParams& p) {
    if (!p.bb_enabled || p.tau_bb == 0.0) return 0.0;
    const double O = p.cutoff_bb;
    return p.renormalized_mass() * p.tau_bb * w * w * w * O * O / (O * O + w * w);
}

/// Memory-friction kernel split into a local (delta) part and a smooth
/// exponential: gamma(s) = local_coeff * 2*delta(s) + smooth_amplitude * e^{-smooth_rate|s|}.
struct DampingKernelSplit {
    double local_coeff = 0.0;
    double smooth_amplitude = 0.0;
    double smooth_rate = 1.0;

    double smooth(double s) const {
        return smooth_amplitude * std::exp(-smooth_rate * std::abs(s));
    }
    bool has_smooth() const { return smooth_amplitude != 0.0; }
};

inline DampingKernelSplit damping_kernel_tb(const PhysicalParams& p) {
    return {0.0, p.gamma_tb * p.cutoff_tb, p.cutoff_tb};
}

/// Radiation kernel: positive local part, negative smooth tail; integrates to
/// zero (no zero-frequency friction from a cubic spectral density).
inline DampingKernelSplit damping_kernel_bb(const PhysicalParams& p) {
    if (!p.bb_enabled) return {0.0, 0.0, 1.0};
    const double O = p.cutoff_bb;
    return {p.tau_bb * O * O, -p.tau_bb * O * O * O, O};
}

/// Strict-Markovian kernel (tests, limiting-case runs).
inline DampingKernelSplit damping_kernel_markovian(double gamma) {
    return {gamma, 0.0, 1.0};
}

/// Sum of kernel splits with independent rates; what the time stepper
/// consumes. Implicitly constructible from a single split.
struct MemoryKernel {
    double local_coeff = 0.0;
    std::vector<std::pair<double, double>> exps;   // (amplitude, rate)

    MemoryKernel() = default;
    MemoryKernel(const DampingKernelSplit& k) { add(k); }

    void add(const DampingKernelSplit& k) {
        local_coeff += k.local_coeff;
        if (k.smooth_amplitude != 0.0) exps.push_back({k.smooth_amplitude, k.smooth_rate});
    }
    double smooth(double s) const {
        double v = 0.0;
        for (const auto& [a, r] : exps) v += a * std::exp(-r * std::abs(s));
        return v;
    }
    bool has_smooth() const { return !exps.empty(); }
};

inline MemoryKernel total_damping_kernel(const PhysicalParams& p) {
    MemoryKernel k;
    k.add(damping_kernel_tb(p));
    if (p.bb_enabled) k.add(damping_kernel_bb(p));
    return k;
}

/// Two-exponential decomposition c_nu*e^{-nu s} + c_om*e^{-om s}; every
/// Matsubara-resolved kernel component has this shape.
struct ExpPair {
    double c_nu = 0.0, nu = 1.0;
    double c_om = 0.0, om = 1.0;

    double operator()(double s) const {
        return c_nu * std::exp(-nu * s) + c_om * std::exp(-om * s);
    }
};

namespace detail {

// Near-confluent rates are split symmetrically by a relative nudge; the
// evaluation error is O((rate*delta*s)^2) against a cancellation-safe pair.
inline void split_degenerate(double& nu, double& om) {
    const double rel = std::abs(nu - om) / std::max(nu, om);
    if (rel < 1e-6) {
        const double a = 0.5 * (nu + om);
        nu = a * (1.0 + 5e-7);
        om = a * (1.0 - 5e-7);
    }
}

} // namespace detail

/// Matsubara-component closed forms for the Drude bath. Index n >= 1; the
/// n = 0 row of the machinery is the smooth damping kernel itself.
struct MatsubaraComponents {
    double gamma, omega_c, nu1;

    MatsubaraComponents(const PhysicalParams& p)
        : gamma(p.gamma_tb), omega_c(p.cutoff_tb),
          nu1(2.0 * M_PI / (p.hbar * p.beta_tb)) {}

    double nu(long n) const { return nu1 * double(n); }

    double zeta0(long n) const {
        const double v = nu(n);
        return gamma * omega_c * v / (omega_c + v);
    }

    ExpPair zeta_pair(long n) const {
        double v = nu(n), O = omega_c;
        detail::split_degenerate(v, O);
        const double d = v * v - O * O;
        return {-gamma * O * O * v / d, v, gamma * O * v * v / d, O};
    }
    ExpPair g_pair(long n) const {
        double v = nu(n), O = omega_c;
        detail::split_degenerate(v, O);
        const double d = v * v - O * O;
        return {gamma * O * O * v / d, v, -gamma * O * O * O / d, O};
    }
    ExpPair f_pair(long n) const {
        double v = nu(n), O = omega_c;
        detail::split_degenerate(v, O);
        const double d = v * v - O * O;
        return {-gamma * O * O * v / d, v, gamma * O * O * v / d, O};
    }
};

/// Frequency-domain fallback for zeta_n: direct quadrature of the spectral
/// representation. Slow; exists so nothing downstream hard-wires the Drude
/// closed forms, and as the oracle for them.
inline double zeta_quadrature(const PhysicalParams& p, long n, double s) {
    const double v = 2.0 * M_PI * double(n) / (p.hbar * p.beta_tb);
    const auto f = [&](double w) {
        return 2.0 * v * v / M_PI * spectral_density_tb(w, p) /
               (p.mass * w * (w * w + v * v)) * std::cos(w * s);
    };
    const double whi = 60.0 * std::max({p.cutoff_tb, v, p.omega0});
    auto r = integrate_oscillatory(f, 1e-12, whi, std::abs(s), 1e-11, 1e-13, 6000);
    return r.value;
}

struct MatsubaraOptions {
    double tol = 1e-8;        // relative tail tolerance on the equilibrium sums
    long force_n = 0;         // fixed truncation for convergence studies (0 = adaptive)
    long n_cap = 100000;
    bool use_quadrature = false;  // fill sampled kernels from the spectral integral
    bool store_sampled = true;
};

/// Truncated Matsubara machinery with analytic tails, sampled on the grid.
struct MatsubaraTable {
    PhysicalParams params;
    double h = 0.0;
    std::size_t n_points = 0;
    long n_terms = 0;
    bool tail_applied = true;
    double nu1 = 0.0;

    std::vector<double> nu;      // [0..N], nu[0] = 0
    std::vector<double> zeta0;   // zeta_n(0), [0] = 0
    std::vector<double> u;       // equilibrium weights, [0] = 1/omega0^2

    // per-n kernels sampled at s_i = i*h (column n), optional
    Eigen::MatrixXd zeta_s, g_s, f_s;

    double lambda_tb = 0.0;      // position-variance sum, tail-corrected
    double omega_eq = 0.0;       // momentum-variance sum, tail-corrected
    double tail_lambda = 0.0;    // applied tail magnitudes (diagnostics)
    double tail_omega = 0.0;

    double time(std::size_t i) const { return h * double(i); }
};

inline MatsubaraTable build_matsubara(const PhysicalParams& p, const TimeGrid& grid,
                                      const MatsubaraOptions& opts = {}) {
    MatsubaraTable t;
    t.params = p;
    t.h = grid.h();
    t.n_points = grid.n_points();
    t.nu1 = 2.0 * M_PI / (p.hbar * p.beta_tb);
    const MatsubaraComponents mc(p);
    const double w0sq = p.omega0 * p.omega0;
    const double hb = p.hbar * p.beta_tb;
    const double A = w0sq + p.gamma_tb * p.cutoff_tb;
    const double gO2 = p.gamma_tb * p.cutoff_tb * p.cutoff_tb;
    const double gO3 = gO2 * p.cutoff_tb;

    // Tail-corrected equilibrium sums at truncation N. Summands are O(1) each,
    // so the adaptive search just doubles N until both sums stabilize.
    const auto sums_at = [&](long N, double& lam, double& om, double& tl, double& to) {
        double su = 0.0, sw = 0.0;
        for (long n = 1; n <= N; ++n) {
            const double z0 = mc.zeta0(n), v = mc.nu(n);
            const double un = 1.0 / (w0sq + v * v + z0);
            su += un;
            sw += un * (w0sq + z0);
        }
        const double s2 = inv_power_tail(2, N), s3 = inv_power_tail(3, N);
        const double s4 = inv_power_tail(4, N), s5 = inv_power_tail(5, N);
        const double s6 = inv_power_tail(6, N);
        const double iv = 1.0 / t.nu1;
        tl = s2 * iv * iv - A * s4 * std::pow(iv, 4) + gO2 * s5 * std::pow(iv, 5) +
             (A * A - gO3) * s6 * std::pow(iv, 6);
        to = A * s2 * iv * iv - gO2 * s3 * std::pow(iv, 3) +
             (gO3 - A * A) * s4 * std::pow(iv, 4);
        lam = (1.0 / w0sq + 2.0 * (su + tl)) / hb;
        om = (1.0 + 2.0 * (sw + to)) / hb;
    };

    long N;
    if (opts.force_n > 0) {
        N = opts.force_n;
    } else {
        // resolve every e^{-nu_n s} down to the first grid cell: nu_N*h ~ 25
        const long exp_floor = long(std::ceil(25.0 / (t.nu1 * t.h)));
        N = std::max<long>(64, exp_floor);
        double lam0, om0, tl, to;
        sums_at(N, lam0, om0, tl, to);
        while (true) {
            double lam1, om1;
            sums_at(2 * N, lam1, om1, tl, to);
            const double rel = std::max(std::abs(lam1 - lam0) / std::abs(lam1),
                                        std::abs(om1 - om0) / std::abs(om1));
            if (rel < opts.tol) break;
            N *= 2;
            lam0 = lam1;
            om0 = om1;
            if (N > opts.n_cap) {
                std::ostringstream os;
                os << "matsubara sum not converged at N = " << opts.n_cap
                   << " (achieved relative tolerance " << rel << ", requested "
                   << opts.tol << ")";
                throw NumericalError(os.str());
            }
        }
    }
    if (N > opts.n_cap) throw NumericalError("matsubara truncation exceeds cap");

    t.n_terms = N;
    sums_at(N, t.lambda_tb, t.omega_eq, t.tail_lambda, t.tail_omega);
    t.tail_lambda *= 2.0 / hb;
    t.tail_omega *= 2.0 / hb;

    t.nu.resize(N + 1);
    t.zeta0.resize(N + 1);
    t.u.resize(N + 1);
    t.nu[0] = 0.0;
    t.zeta0[0] = 0.0;
    t.u[0] = 1.0 / w0sq;
    for (long n = 1; n <= N; ++n) {
        t.nu[n] = mc.nu(n);
        t.zeta0[n] = mc.zeta0(n);
        t.u[n] = 1.0 / (w0sq + t.nu[n] * t.nu[n] + t.zeta0[n]);
    }

    if (opts.store_sampled) {
        const std::size_t np = t.n_points;
        t.zeta_s.resize(np, N + 1);
        t.g_s.resize(np, N + 1);
        t.f_s.resize(np, N + 1);
        const DampingKernelSplit g0 = damping_kernel_tb(p);
        for (std::size_t i = 0; i < np; ++i) {
            t.zeta_s(i, 0) = 0.0;
            t.g_s(i, 0) = g0.smooth(t.time(i));
            t.f_s(i, 0) = 0.0;
        }
        parallel_for(std::size_t(N), [&](std::size_t k) {
            const long n = long(k) + 1;
            if (opts.use_quadrature) {
                // f_n is the analytic derivative of zeta_n; differencing the
                // quadrature would only add noise, so it stays closed-form.
                const ExpPair f = mc.f_pair(n);
                for (std::size_t i = 0; i < np; ++i) {
                    const double s = t.time(i);
                    const double z = zeta_quadrature(p, n, s);
                    t.zeta_s(i, n) = z;
                    t.g_s(i, n) = g0.smooth(s) - z;
                    t.f_s(i, n) = f(s);
                }
            } else {
                const ExpPair z = mc.zeta_pair(n), g = mc.g_pair(n), f = mc.f_pair(n);
                for (std::size_t i = 0; i < np; ++i) {
                    const double s = t.time(i);
                    t.zeta_s(i, n) = z(s);
                    t.g_s(i, n) = g(s);
                    t.f_s(i, n) = f(s);
                }
            }
        });
    }
    return t;
}

struct EquilibriumMoments {
    double qq = 0.0;        // <q^2> in equilibrium
    double pp = 0.0;        // <p^2> in equilibrium
    double lambda = 0.0;
    double omega_eq = 0.0;
};

inline EquilibriumMoments equilibrium_moments(const MatsubaraTable& t) {
    EquilibriumMoments em;
    em.lambda = t.lambda_tb;
    em.omega_eq = t.omega_eq;
    em.qq = t.params.hbar / t.params.mass * t.lambda_tb;
    em.pp = t.params.hbar * t.params.mass * t.omega_eq;
    return em;
}

} // namespace pqosc
