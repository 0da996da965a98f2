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
#include "pqosc/spectral.hpp"

namespace pqosc {

struct NoiseOptions {
    double window_factor = 10.0;    // vacuum regularization window, in units of cutoff_bb
    bool bb_subtracted_mode = false; // once-subtracted cross-check representation
    double bb_quad_rel_tol = 1e-7;
    double bb_fail_rel_err = 1e-4;
    bool build_r = true;
};

/// Grid-sampled noise data. Tables come in two flavors: pointwise values
/// (dumps, oracle comparisons) and quadrature-ready "effective" samples that
/// make the trapezoidal rules integrate the stiff Matsubara exponentials
/// exactly against piecewise-linear factors. The dense matrix r is built from
/// the effective samples and is consumed with plain trapezoid weights.
struct NoiseTable {
    PhysicalParams params;
    double h = 0.0;
    std::size_t n_points = 0;
    double lambda_tb = 0.0;
    double omega_eq = 0.0;

    Eigen::VectorXd c1_pt, c2_pt, c1t_smooth_pt;
    Eigen::VectorXd c1_eff, c2_eff, c1t_smooth_eff;
    double c1t_local = 0.0;         // delta coefficient of the bb kernel inside C~1

    Eigen::VectorXd k_tb_re_pt;     // truncation-regularized at s = 0 (log divergence)
    Eigen::VectorXd k_bb_thermal_pt, k_bb_vacuum_pt;
    Eigen::VectorXd klag_eff;       // lag-cell-averaged total K(s-u), TB + BB

    Eigen::MatrixXd r;              // dense symmetric R(s_i, u_j), effective samples

    // analytic >N tail coefficients, kept for downstream functional assembly
    double c1_tail_om = 0.0;        // on e^{-cutoff*s}
    double c1_tail_nu = 0.0;        // on the surrogate e^{-nu_{N+1}*s}
    double c2_tail = 0.0;           // on (e^{-cutoff*s} - e^{-nu_{N+1}*s})
    double nu_surrogate = 0.0;

    double omega_window = 0.0;
    double bb_quad_rel_err = 0.0;

    double time(std::size_t i) const { return h * double(i); }
};

namespace detail {

// Product-integration samples of coef*e^{-rate*s}: after this accumulation,
// sum_j w_j row[j] v(s_j) with trapezoid weights w equals the exact integral
// of coef*e^{-rate*s} against any piecewise-linear v.
inline void add_exp_effective(Eigen::VectorXd& row, double coef, double rate, double h) {
    const std::size_t n = std::size_t(row.size()) - 1;
    const double x = rate * h;
    double alpha, beta;
    if (std::abs(x) < 1e-4) {
        alpha = 0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0;
        beta = 0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0;
    } else {
        const double em = std::expm1(-x);
        alpha = (x + em) / (x * x);
        beta = (-em - x * (em + 1.0)) / (x * x);
    }
    const double step = std::exp(-x);
    double pre = 1.0;                    // e^{-rate * s_j}
    row[0] += coef * 2.0 * alpha;        // j = 0 carries only its right cell
    for (std::size_t j = 1; j < n; ++j) {
        const double pre_prev = pre;
        pre *= step;
        row[j] += coef * (pre_prev * beta + pre * alpha);
    }
    row[n] += coef * 2.0 * pre * beta;
}

// Lag-cell averages of coef*e^{-rate*w}: cell j covers [(j-1/2)h, (j+1/2)h]
// (clipped at 0 for j = 0), so a Toeplitz matrix built from these integrates
// stiff lag kernels correctly under the 2-D trapezoid rule.
inline void add_exp_lag_avg(Eigen::VectorXd& lag, double coef, double rate, double h) {
    const std::size_t n = std::size_t(lag.size());
    const double xh = rate * h * 0.5;
    // j = 0: average over [0, h/2]
    lag[0] += coef * (std::abs(xh) < 1e-6 ? (1.0 - 0.5 * xh) : -std::expm1(-xh) / xh);
    const double x = rate * h;
    const double m0 = std::abs(x) < 1e-6 ? (1.0 - 0.5 * x) : -std::expm1(-x) / x;
    const double step = std::exp(-x);
    double pre = std::exp(-xh);          // e^{-rate*(j-1/2)h} at j = 1
    for (std::size_t j = 1; j < n; ++j) {
        lag[j] += coef * pre * m0;
        pre *= step;
    }
}

// sum_{n > N} q^n / n^2 for q in [0, 1]; switches between direct tail
// summation and dilog reflection depending on which converges faster.
inline double dilog_tail(double q, long N) {
    if (q <= 0.0) return 0.0;
    if (q >= 1.0) return inv_power_tail(2, N);
    const double lnq = std::log(q);
    const double direct_terms = -40.0 / lnq - double(N);
    if (direct_terms < double(N)) {
        double acc = 0.0, qn = std::pow(q, double(N + 1));
        for (long n = N + 1;; ++n) {
            const double term = qn / double(n) / double(n);
            acc += term;
            if (term < 1e-19 * (acc + 1e-300) || qn < 1e-300) break;
            qn *= q;
        }
        return acc;
    }
    double partial = 0.0, qn = 1.0;
    for (long n = 1; n <= N; ++n) {
        qn *= q;
        partial += qn / double(n) / double(n);
    }
    return dilog(q) - partial;
}

} // namespace detail

inline NoiseTable build_noise_table(const PhysicalParams& p, const TimeGrid& grid,
                                    const MatsubaraTable& mats,
                                    const NoiseOptions& opts = {}) {
    NoiseTable nt;
    nt.params = p;
    nt.h = grid.h();
    nt.n_points = grid.n_points();
    nt.lambda_tb = mats.lambda_tb;
    nt.omega_eq = mats.omega_eq;

    const long N = mats.n_terms;
    const std::size_t np = nt.n_points;
    const double h = nt.h;
    const double hb = p.hbar * p.beta_tb;
    const double nu1 = mats.nu1;
    const double Om = p.cutoff_tb;
    const double gO2 = p.gamma_tb * Om * Om;
    const double gO3 = gO2 * Om;
    const double A = p.omega0 * p.omega0 + p.gamma_tb * Om;
    const MatsubaraComponents mc(p);

    // ---- analytic >N tail coefficients -------------------------------------
    const double s2 = inv_power_tail(2, N), s3 = inv_power_tail(3, N);
    const double s4 = inv_power_tail(4, N), s6 = inv_power_tail(6, N);
    const double iv = 1.0 / nu1;
    const double nuN1 = nu1 * double(N + 1);
    // sum_{n>N} 1/(nu_n^2 - Om^2) and friends
    const double sum_inv_d = s2 * iv * iv + Om * Om * s4 * std::pow(iv, 4) +
                             std::pow(Om, 4) * s6 * std::pow(iv, 6);
    const double c1_tail_om = -gO3 * s4 * std::pow(iv, 4);      // on e^{-Om s}
    const double c1_tail_nu = gO2 * s3 * std::pow(iv, 3);       // surrogate e^{-nu_{N+1} s}
    const double c2_tail = gO2 * (s2 * iv * iv + (Om * Om - A) * s4 * std::pow(iv, 4));
    nt.c1_tail_om = c1_tail_om;
    nt.c1_tail_nu = c1_tail_nu;
    nt.c2_tail = c2_tail;
    nt.nu_surrogate = nuN1;

    // degenerate indices get explicit exponentials in the shared-power loops
    std::vector<long> degenerate;
    for (long n = 1; n <= N; ++n)
        if (std::abs(mc.nu(n) - Om) < 1e-6 * std::max(mc.nu(n), Om)) degenerate.push_back(n);

    // ---- pointwise c1, c2, k_tb_re (shared q^n recurrence per s) -----------
    nt.c1_pt.setZero(np);
    nt.c2_pt.setZero(np);
    nt.k_tb_re_pt.setZero(np);
    parallel_for(np, [&](std::size_t i) {
        const double s = nt.time(i);
        const double q = std::exp(-nu1 * s);
        const double eOm = std::exp(-Om * s);
        double sum_ug = 0.0, sum_uvf = 0.0, sum_g = 0.0, plog = 0.0;
        double qn = 1.0;
        for (long n = 1; n <= N; ++n) {
            qn *= q;
            const double v = mats.nu[std::size_t(n)];
            const double d = v * v - Om * Om;
            double gn, fn;
            if (std::abs(v - Om) < 1e-6 * std::max(v, Om)) {
                gn = mc.g_pair(n)(s);
                fn = mc.f_pair(n)(s);
            } else {
                gn = (gO2 * v * qn - gO3 * eOm) / d;
                fn = gO2 * v * (eOm - qn) / d;
            }
            const double un = mats.u[std::size_t(n)];
            sum_ug += un * gn;
            sum_uvf += un * v * fn;
            sum_g += gn;
            plog += qn / double(n);
        }
        const double g0s = p.gamma_tb * Om * eOm;
        const double eNuT = std::exp(-nuN1 * s);  // surrogate tail decay
        const double c1_tail = c1_tail_om * eOm + c1_tail_nu * eNuT;
        const double c2_tail_s = c2_tail * (eOm - eNuT);
        nt.c1_pt[i] = (mats.u[0] * g0s + 2.0 * (sum_ug + c1_tail)) / (hb * mats.lambda_tb);
        nt.c2_pt[i] = 2.0 * (sum_uvf + c2_tail_s) / hb;
        // exact exponential remainder of the lag kernel via the log series
        double klog_tail = 0.0;
        if (i > 0) klog_tail = (-std::log1p(-q) - plog) / nu1;
        const double k_tail = -gO3 * sum_inv_d * eOm + gO2 * klog_tail;
        nt.k_tb_re_pt[i] = p.mass / hb * (g0s + 2.0 * (sum_g + k_tail));
    });

    // ---- effective c1, c2 (product-integration samples) --------------------
    nt.c1_eff.setZero(np);
    nt.c2_eff.setZero(np);
    {
        Eigen::VectorXd uc1 = Eigen::VectorXd::Zero(np), uc2 = Eigen::VectorXd::Zero(np);
        detail::add_exp_effective(uc1, mats.u[0] * p.gamma_tb * Om, Om, h);
        for (long n = 1; n <= N; ++n) {
            const double un = mats.u[std::size_t(n)];
            const ExpPair g = mc.g_pair(n), f = mc.f_pair(n);
            detail::add_exp_effective(uc1, 2.0 * un * g.c_nu, g.nu, h);
            detail::add_exp_effective(uc1, 2.0 * un * g.c_om, g.om, h);
            const double v = mats.nu[std::size_t(n)];
            detail::add_exp_effective(uc2, 2.0 * un * v * f.c_nu, f.nu, h);
            detail::add_exp_effective(uc2, 2.0 * un * v * f.c_om, f.om, h);
        }
        detail::add_exp_effective(uc1, 2.0 * c1_tail_om, Om, h);
        detail::add_exp_effective(uc1, 2.0 * c1_tail_nu, nuN1, h);
        detail::add_exp_effective(uc2, 2.0 * c2_tail, Om, h);
        detail::add_exp_effective(uc2, -2.0 * c2_tail, nuN1, h);
        nt.c1_eff = uc1 / (hb * mats.lambda_tb);
        nt.c2_eff = uc2 / hb;
    }

    // ---- C~1 = C1 + bb smooth kernel; the bb delta part stays analytic -----
    const DampingKernelSplit bb = damping_kernel_bb(p);
    nt.c1t_local = bb.local_coeff;
    nt.c1t_smooth_pt = nt.c1_pt;
    nt.c1t_smooth_eff = nt.c1_eff;
    if (bb.has_smooth()) {
        for (std::size_t i = 0; i < np; ++i)
            nt.c1t_smooth_pt[i] += bb.smooth(nt.time(i));
        detail::add_exp_effective(nt.c1t_smooth_eff, bb.smooth_amplitude, bb.smooth_rate, h);
    }

    // ---- lag-averaged TB noise kernel ---------------------------------------
    nt.klag_eff.setZero(np);
    {
        const double pref = p.mass / hb;
        detail::add_exp_lag_avg(nt.klag_eff, pref * p.gamma_tb * Om, Om, h);
        for (long n = 1; n <= N; ++n) {
            const ExpPair g = mc.g_pair(n);
            detail::add_exp_lag_avg(nt.klag_eff, 2.0 * pref * g.c_nu, g.nu, h);
            detail::add_exp_lag_avg(nt.klag_eff, 2.0 * pref * g.c_om, g.om, h);
        }
        detail::add_exp_lag_avg(nt.klag_eff, -2.0 * pref * gO3 * sum_inv_d, Om, h);
        // exact >N remainder: cell averages of the exponential log series
        std::vector<double> lp(np + 1);
        parallel_for(np + 1, [&](std::size_t e) {
            const double edge = (double(e) - 0.5) * h;
            lp[e] = detail::dilog_tail(e == 0 ? 1.0 : std::exp(-nu1 * edge), N);
        });
        const double tail_pref = 2.0 * pref * gO2 / (nu1 * nu1);
        nt.klag_eff[0] += tail_pref * (lp[0] - lp[1]) / (0.5 * h);
        for (std::size_t j = 1; j < np; ++j)
            nt.klag_eff[j] += tail_pref * (lp[j] - lp[j + 1]) / h;
    }

    // ---- blackbody noise kernel ---------------------------------------------
    nt.omega_window = opts.window_factor * p.cutoff_bb;
    nt.k_bb_thermal_pt.setZero(np);
    nt.k_bb_vacuum_pt.setZero(np);
    nt.bb_quad_rel_err = 0.0;
    if (p.bb_enabled && p.tau_bb > 0.0) {
        const double beta_bb = p.beta_bb;
        const bool has_thermal = std::isfinite(beta_bb);
        const double w_w = nt.omega_window;
        const double whi_th = has_thermal ? 80.0 / (p.hbar * beta_bb) + 5.0 * p.cutoff_bb : 0.0;
        const double whi_vac = 80.0 * w_w;

        const auto thermal_weight = [&](double w) {
            const double x = p.hbar * beta_bb * w;
            return x > 700.0 ? 0.0 : 2.0 / std::expm1(x);
        };

        std::vector<double> errs(np, 0.0);
        Eigen::VectorXd klag_bb = Eigen::VectorXd::Zero(np);
        const int order = opts.bb_subtracted_mode ? 2 : 0;  // divide J by w^order
        Eigen::VectorXd lag_th = Eigen::VectorXd::Zero(np), lag_vac = Eigen::VectorXd::Zero(np);
        parallel_for(np, [&](std::size_t i) {
            const double s = nt.time(i);
            double err = 0.0;
            // pointwise parts (dumps, zero-point checks): always direct form
            if (has_thermal) {
                auto fi = [&](double w) {
                    return spectral_density_bb(w, p) * thermal_weight(w) * std::cos(w * s) / M_PI;
                };
                auto r = integrate_oscillatory(fi, 0.0, whi_th, s, opts.bb_quad_rel_tol, 0.0);
                nt.k_bb_thermal_pt[i] = r.value;
                err = std::max(err, r.error);
            }
            {
                auto fi = [&](double w) {
                    return spectral_density_bb(w, p) * std::exp(-w / w_w) * std::cos(w * s) / M_PI;
                };
                auto r = integrate_oscillatory(fi, 0.0, whi_vac, s, opts.bb_quad_rel_tol, 0.0);
                nt.k_bb_vacuum_pt[i] = r.value;
                err = std::max(err, r.error);
            }
            // lag-cell-averaged samples for the matrix: the cell average of
            // cos(w s) over [c - d, c + d] is cos(w c) * sinc(w d)
            const double cw = i == 0 ? 0.25 * h : double(i) * h;
            const double halfwidth = i == 0 ? 0.25 * h : 0.5 * h;
            if (order == 0) {
                if (has_thermal) {
                    auto fi = [&](double w) {
                        return spectral_density_bb(w, p) * thermal_weight(w) / M_PI *
                               std::cos(w * cw) * sinc(w * halfwidth);
                    };
                    auto r = integrate_oscillatory(fi, 0.0, whi_th, cw, opts.bb_quad_rel_tol, 0.0);
                    lag_th[i] = r.value;
                    err = std::max(err, r.error);
                }
                auto fi = [&](double w) {
                    return spectral_density_bb(w, p) * std::exp(-w / w_w) / M_PI *
                           std::cos(w * cw) * sinc(w * halfwidth);
                };
                auto r = integrate_oscillatory(fi, 0.0, whi_vac, cw, opts.bb_quad_rel_tol, 0.0);
                lag_vac[i] = r.value;
                err = std::max(err, r.error);
            } else {
                // once-subtracted cross-check: sample K2 = int (J/w^2)(...)cos,
                // differentiate twice on the grid afterwards
                auto fi = [&](double w) {
                    const double jw = spectral_density_bb(w, p) / (w * w);
                    const double weight = (has_thermal ? thermal_weight(w) : 0.0) +
                                          std::exp(-w / w_w);
                    return jw * weight * std::cos(w * double(i) * h) / M_PI;
                };
                auto r = integrate_oscillatory(fi, 1e-12, std::max(whi_th, whi_vac),
                                               double(i) * h, opts.bb_quad_rel_tol, 0.0);
                lag_vac[i] = r.value;  // holds K2 samples in this mode
                err = std::max(err, r.error);
            }
            errs[i] = err;
        });
        if (order == 0) {
            klag_bb = lag_th + lag_vac;
        } else {
            // second central difference of K2; even continuation across w = 0
            for (std::size_t j = 0; j < np; ++j) {
                const double km = j == 0 ? lag_vac[1] : lag_vac[j - 1];
                const double kp = j + 1 < np ? lag_vac[j + 1] : lag_vac[j];
                klag_bb[j] = -(kp - 2.0 * lag_vac[j] + km) / (h * h);
            }
        }
        nt.klag_eff += klag_bb;

        double scale = std::max(nt.k_bb_vacuum_pt.cwiseAbs().maxCoeff(),
                                nt.k_bb_thermal_pt.cwiseAbs().maxCoeff());
        scale = std::max(scale, 1e-300);
        double emax = 0.0;
        for (double e : errs) emax = std::max(emax, e);
        nt.bb_quad_rel_err = emax / scale;
        if (nt.bb_quad_rel_err > opts.bb_fail_rel_err) {
            std::ostringstream os;
            os << "blackbody kernel quadrature error " << nt.bb_quad_rel_err
               << " exceeds " << opts.bb_fail_rel_err;
            throw NumericalError(os.str());
        }
    }

    // ---- dense noise matrix -------------------------------------------------
    if (opts.build_r) {
        Eigen::MatrixXd G(N + 1, np), F(std::max<long>(N, 1), np);
        G.setZero();
        F.setZero();
        {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(np);
            detail::add_exp_effective(row, p.gamma_tb * Om, Om, h);
            G.row(0) = std::sqrt(mats.u[0] / hb) * row.transpose();
        }
        parallel_for(std::size_t(N), [&](std::size_t k) {
            const long n = long(k) + 1;
            const double wu = std::sqrt(2.0 * mats.u[std::size_t(n)] / hb);
            Eigen::VectorXd row = Eigen::VectorXd::Zero(np);
            const ExpPair g = mc.g_pair(n);
            detail::add_exp_effective(row, g.c_nu, g.nu, h);
            detail::add_exp_effective(row, g.c_om, g.om, h);
            G.row(n) = wu * row.transpose();
            row.setZero();
            const ExpPair f = mc.f_pair(n);
            detail::add_exp_effective(row, f.c_nu, f.nu, h);
            detail::add_exp_effective(row, f.c_om, f.om, h);
            F.row(n - 1) = wu * row.transpose();
        });
        nt.r.resize(np, np);
        nt.r.noalias() = G.transpose() * G;
        if (N >= 1) nt.r.noalias() -= F.transpose() * F;
        nt.r.noalias() -= mats.lambda_tb * nt.c1_eff * nt.c1_eff.transpose();
        for (std::size_t i = 0; i < np; ++i)
            for (std::size_t j = 0; j <= i; ++j)
                nt.r(i, j) += nt.klag_eff[i - j] / p.mass;
        // exact symmetry by construction of the upper triangle from the lower
        for (std::size_t i = 0; i < np; ++i)
            for (std::size_t j = 0; j < i; ++j)
                nt.r(j, i) = nt.r(i, j);
    }
    return nt;
}

} // namespace pqosc
