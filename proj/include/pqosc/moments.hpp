#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "pqosc/errors.hpp"
#include "pqosc/math/special.hpp"
#include "pqosc/model.hpp"
#include "pqosc/noise.hpp"
#include "pqosc/propagator.hpp"
#include "pqosc/spectral.hpp"

namespace pqosc {

struct MomentOptions {
    // covariance normalization in the direct printed combination instead of
    // the marginalization (Schur) form; kept for cross-checks, the two agree
    // only where both are derived consistently
    bool use_printed_qq_form = false;
    double im_tol = 1e-8;            // residual-imaginary-part consistency bound
    double uncertainty_slack = 1e-6; // tolerated relative dip below hbar^2/4
};

/// First and second moments of the Gaussian state at one time.
struct GaussianState {
    double t = 0.0;
    double mean_q = 0.0, mean_p = 0.0;
    double cov_qq = 0.0, cov_pq = 0.0, cov_pp = 0.0;
    bool physical = true;    // uncertainty product above the quantum floor

    double uncertainty_product() const { return cov_qq * cov_pp - cov_pq * cov_pq; }
    double purity(double hbar) const {
        return 0.5 * hbar / std::sqrt(std::max(uncertainty_product(), 1e-300));
    }
};

/// Mass scale of the dressed oscillator: electromagnetic coupling renormalizes
/// it; without the radiation field the bare mass is the mass.
inline double mass_scale(const PhysicalParams& p) {
    return p.bb_enabled ? p.renormalized_mass() : p.mass;
}

/// Initial (contact-bath equilibrium) state, also the t = 0 output row.
inline GaussianState equilibrium_state(const PhysicalParams& p,
                                       const MatsubaraTable& mats) {
    GaussianState st;
    const double M = mass_scale(p);
    st.cov_qq = p.hbar * mats.lambda_tb / M;
    st.cov_pp = p.hbar * M * mats.omega_eq;
    return st;
}

// ---------------------------------------------------------------------------
// functional basis: every time-dependent coefficient as exponential lists
// ---------------------------------------------------------------------------

struct ExpTerm {
    double coef = 0.0, rate = 0.0;
};

/// Exact integral of an exponential list against the piecewise-linear
/// interpolant of v over [0, (len-1)*h]: cell-moment product integration,
/// valid for any sub-range of the master grid.
inline double integrate_exp_list(const std::vector<ExpTerm>& terms,
                                 const Eigen::VectorXd& v, double h) {
    const auto n = std::size_t(v.size()) - 1;
    double acc = 0.0;
    for (const ExpTerm& tm : terms) {
        double ca, cb;
        exp_cell_moments(tm.rate, 0.0, h, ca, cb);
        const double step = std::exp(-tm.rate * h);
        double pre = 1.0, sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            sum += pre * (ca * v[j] + cb * v[j + 1]);
            pre *= step;
        }
        acc += tm.coef * sum;
    }
    return acc;
}

inline double integrate_exp_pair(const ExpPair& pair, const Eigen::VectorXd& v,
                                 double h) {
    return integrate_exp_list({{pair.c_nu, pair.nu}, {pair.c_om, pair.om}}, v, h);
}

/// All scalar functionals feeding the moment algebra, assembled once per run.
/// Lists carry their prefactors; R rows keep the per-mode weight mu_n separate
/// because the quadratic form needs the products of two different integrals.
struct FunctionalBasis {
    double lambda = 0.0, omega_eq = 0.0;
    double c1t_local = 0.0;
    std::vector<ExpTerm> c1, c2, c1t_smooth;
    std::vector<double> mu_g, mu_f;      // mode weights u_n w_n / (hbar beta)
    std::vector<ExpPair> g_modes, f_modes;
    Eigen::VectorXd klag;                // lag-cell-averaged K, mass convention of kernel_mass
    double kernel_mass = 1.0;
};

inline FunctionalBasis build_functional_basis(const PhysicalParams& p,
                                              const MatsubaraTable& mats,
                                              const NoiseTable& nt) {
    FunctionalBasis b;
    b.lambda = mats.lambda_tb;
    b.omega_eq = mats.omega_eq;
    b.c1t_local = nt.c1t_local;
    b.klag = nt.klag_eff;
    b.kernel_mass = p.mass;

    const long N = mats.n_terms;
    const double hb = p.hbar * p.beta_tb;
    const double Om = p.cutoff_tb;
    const MatsubaraComponents mc(p);
    const double inv_lam = 1.0 / (hb * b.lambda);

    b.c1.push_back({mats.u[0] * p.gamma_tb * Om * inv_lam, Om});
    for (long n = 1; n <= N; ++n) {
        const double un = mats.u[std::size_t(n)];
        const ExpPair g = mc.g_pair(n), f = mc.f_pair(n);
        b.c1.push_back({2.0 * un * g.c_nu * inv_lam, g.nu});
        b.c1.push_back({2.0 * un * g.c_om * inv_lam, g.om});
        const double v = mats.nu[std::size_t(n)];
        b.c2.push_back({2.0 * un * v * f.c_nu / hb, f.nu});
        b.c2.push_back({2.0 * un * v * f.c_om / hb, f.om});
        b.mu_g.push_back(2.0 * un / hb);
        b.g_modes.push_back(g);
        b.mu_f.push_back(2.0 * un / hb);
        b.f_modes.push_back(f);
    }
    b.mu_g.push_back(mats.u[0] / hb);    // n = 0 row: the bare smooth kernel
    b.g_modes.push_back({p.gamma_tb * Om, Om, 0.0, Om});

    b.c1.push_back({2.0 * nt.c1_tail_om * inv_lam, Om});
    b.c1.push_back({2.0 * nt.c1_tail_nu * inv_lam, nt.nu_surrogate});
    b.c2.push_back({2.0 * nt.c2_tail / hb, Om});
    b.c2.push_back({-2.0 * nt.c2_tail / hb, nt.nu_surrogate});

    b.c1t_smooth = b.c1;
    const DampingKernelSplit bb = damping_kernel_bb(p);
    if (bb.has_smooth()) b.c1t_smooth.push_back({bb.smooth_amplitude, bb.smooth_rate});
    return b;
}

namespace detail {

/// Toeplitz quadratic form sum_ij w_i w_j K[|i-j|] a_i b_j over the sub-grid
/// the vectors live on, by lag.
inline double toeplitz_quadratic(const Eigen::VectorXd& klag, double kernel_mass,
                                 const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                 double h) {
    const auto n = std::size_t(a.size()) - 1;
    Eigen::VectorXd wa = a, wb = b;
    wa[0] *= 0.5;
    wa[n] *= 0.5;
    wb[0] *= 0.5;
    wb[n] *= 0.5;
    double acc = klag[0] * wa.dot(wb);
    for (std::size_t l = 1; l <= n; ++l) {
        const auto m = long(n + 1 - l);
        const double s = wa.head(m).dot(wb.tail(m)) + wb.head(m).dot(wa.tail(m));
        acc += klag[long(l)] * s;
    }
    return acc * h * h / kernel_mass;
}

inline double real_checked(std::complex<double> z, double scale, double tol,
                           const char* what) {
    if (std::abs(z.imag()) > tol * std::max(scale, std::abs(z.real()))) {
        std::ostringstream os;
        os << "moment algebra lost realness in " << what << ": imag "
           << z.imag() << " vs scale " << std::max(scale, std::abs(z.real()));
        throw NumericalError(os.str());
    }
    return z.real();
}

} // namespace detail

/// Full Gaussian state at the snapshot carried by `vu`. The normalization is
/// evaluated in the caustic-regular grouping: every occurrence of the forward
/// fundamental solution enters through chi = phi1(t) and ratios that stay
/// finite through focal points of the inverse problem.
inline GaussianState snapshot_state(const PhysicalParams& p, const DriveSpec& drive,
                                    const FunctionalBasis& fb, const VUAssembly& vu,
                                    const MomentOptions& opts = {},
                                    std::vector<std::string>* warnings = nullptr) {
    using cd = std::complex<double>;
    const cd I(0.0, 1.0);

    const double h = vu.h;
    const double t = h * double(vu.t_index);
    const double M = mass_scale(p);
    const double kappa = M / p.hbar;
    const auto n = std::size_t(vu.t_index);

    // laser functionals: smooth integrand, plain trapezoid
    double ep = 0.0, em = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
        const double w = (j == 0 || j == n) ? 0.5 * h : h;
        const double e = drive.laser(h * double(j));
        ep += w * vu.v1[long(j)] * e;
        em += w * vu.v2[long(j)] * e;
    }

    // stiff-coefficient functionals: exact product integration
    const double c2p = integrate_exp_list(fb.c2, vu.v1, h);
    const double c2m = integrate_exp_list(fb.c2, vu.v2, h);
    const double c1tp = integrate_exp_list(fb.c1t_smooth, vu.v1, h) +
                        fb.c1t_local * vu.v1[0];
    const double c1tm = integrate_exp_list(fb.c1t_smooth, vu.v2, h) +
                        fb.c1t_local * vu.v2[0];

    // noise quadratic forms R_ab = sum_n mu_n [g.g - f.f] - lambda c1.c1 + K/m
    const std::size_t ng = fb.g_modes.size(), nf = fb.f_modes.size();
    double r11 = 0.0, r12 = 0.0, r22 = 0.0;
    for (std::size_t k = 0; k < ng; ++k) {
        const double i1 = integrate_exp_pair(fb.g_modes[k], vu.v1, h);
        const double i2 = integrate_exp_pair(fb.g_modes[k], vu.v2, h);
        r11 += fb.mu_g[k] * i1 * i1;
        r12 += fb.mu_g[k] * i1 * i2;
        r22 += fb.mu_g[k] * i2 * i2;
    }
    for (std::size_t k = 0; k < nf; ++k) {
        const double i1 = integrate_exp_pair(fb.f_modes[k], vu.v1, h);
        const double i2 = integrate_exp_pair(fb.f_modes[k], vu.v2, h);
        r11 -= fb.mu_f[k] * i1 * i1;
        r12 -= fb.mu_f[k] * i1 * i2;
        r22 -= fb.mu_f[k] * i2 * i2;
    }
    {
        const double i1 = integrate_exp_list(fb.c1, vu.v1, h);
        const double i2 = integrate_exp_list(fb.c1, vu.v2, h);
        r11 -= fb.lambda * i1 * i1;
        r12 -= fb.lambda * i1 * i2;
        r22 -= fb.lambda * i2 * i2;
    }
    r11 += detail::toeplitz_quadratic(fb.klag, fb.kernel_mass, vu.v1, vu.v1, h);
    r12 += detail::toeplitz_quadratic(fb.klag, fb.kernel_mass, vu.v1, vu.v2, h);
    r22 += detail::toeplitz_quadratic(fb.klag, fb.kernel_mass, vu.v2, vu.v2, h);

    // quadratic-form coefficients, chi-scaled
    const double chi = vu.chi;
    const cd a11 = kappa * (fb.omega_eq - 2.0 * c2p + r11);
    const cd a22 = kappa / fb.lambda;
    const cd b12 = -I * kappa * (vu.phi2_t + chi * c1tp);
    const cd pchi = -I * kappa;
    const cd gchi = I * kappa * (chi * c1tm - vu.wtilde);
    const cd q = kappa * (c2m - r12);
    const cd s = I * ep / p.hbar;
    const cd delta = a11 * a22 * chi * chi - b12 * b12;

    GaussianState st;
    st.t = t;

    const double qq_scale = p.hbar * fb.lambda / M;
    double cov_qq;
    if (opts.use_printed_qq_form) {
        // direct printed combination; disagrees with the marginalization form
        // away from the free limit, kept to make the discrepancy measurable
        const cd v = (p.hbar * p.hbar) / (M * M) *
                     (a11 * chi * chi - (p.hbar / M) * b12 * b12);
        cov_qq = detail::real_checked(v, qq_scale, opts.im_tol, "cov_qq(printed)");
    } else {
        const cd v = delta / (a22 * kappa * kappa);
        cov_qq = detail::real_checked(v, qq_scale, opts.im_tol, "cov_qq");
    }
    st.cov_qq = cov_qq;
    st.mean_q = chi * ep / M;

    const cd c = a22 * pchi * q * chi / delta +
                 (I * kappa * vu.dphi1_t * delta - b12 * pchi * gchi) / (chi * delta);
    const cd spq = -I * p.hbar * c * cov_qq;
    st.cov_pq = detail::real_checked(spq, p.hbar, opts.im_tol, "cov_pq");

    const cd w = (a22 * q * q * chi * chi - 2.0 * b12 * q * gchi + a11 * gchi * gchi) /
                     (2.0 * delta) -
                 0.5 * kappa * r22;
    const cd spp = spq * spq / cov_qq - 2.0 * p.hbar * p.hbar * w;
    st.cov_pp = detail::real_checked(spp, p.hbar * M * fb.omega_eq, opts.im_tol,
                                     "cov_pp");

    const cd d = (a22 * q * s * chi * chi - b12 * s * gchi) / delta + I * em / p.hbar;
    const cd mp = -I * p.hbar * d + (spq / cov_qq) * st.mean_q;
    st.mean_p = detail::real_checked(
        mp, std::abs(st.mean_q) * M * p.omega0 + p.hbar, opts.im_tol, "mean_p");

    const double floor = 0.25 * p.hbar * p.hbar;
    if (st.uncertainty_product() < floor * (1.0 - opts.uncertainty_slack)) {
        st.physical = false;
        if (warnings) {
            std::ostringstream os;
            os << "uncertainty product " << st.uncertainty_product() << " below "
               << floor << " at t = " << t;
            warnings->push_back(os.str());
        }
    }
    return st;
}

// ---------------------------------------------------------------------------
// position-representation density matrix
// ---------------------------------------------------------------------------

struct DensityMatrixSlice {
    double t = 0.0;
    Eigen::VectorXd x;
    Eigen::MatrixXcd rho;
};

/// rho(x, x') of the Gaussian state on a symmetric window around the mean:
/// Gaussian in the sum coordinate, Gaussian-damped and phase-twisted in the
/// difference coordinate. Trace integrates to one analytically.
inline DensityMatrixSlice sample_density_matrix(const GaussianState& st,
                                                const PhysicalParams& p,
                                                std::size_t n_half = 60,
                                                double n_sigma = 4.0) {
    DensityMatrixSlice d;
    d.t = st.t;
    const auto npts = 2 * n_half + 1;
    const double sig = std::sqrt(st.cov_qq);
    d.x.resize(npts);
    for (std::size_t i = 0; i < npts; ++i)
        d.x[long(i)] = st.mean_q + n_sigma * sig * (double(i) / double(n_half) - 1.0);

    const double norm = 1.0 / std::sqrt(2.0 * M_PI * st.cov_qq);
    const double width_y = (st.cov_pp - st.cov_pq * st.cov_pq / st.cov_qq) /
                           (2.0 * p.hbar * p.hbar);
    const double phase_xy = st.cov_pq / (st.cov_qq * p.hbar);
    d.rho.resize(npts, npts);
    for (std::size_t i = 0; i < npts; ++i)
        for (std::size_t j = 0; j < npts; ++j) {
            const double xs = 0.5 * (d.x[long(i)] + d.x[long(j)]) - st.mean_q;
            const double y = d.x[long(i)] - d.x[long(j)];
            const double re = -xs * xs / (2.0 * st.cov_qq) - width_y * y * y;
            const double im = st.mean_p * y / p.hbar + phase_xy * xs * y;
            d.rho(long(i), long(j)) = norm * std::exp(std::complex<double>(re, im));
        }
    return d;
}

} // namespace pqosc
