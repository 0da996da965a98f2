#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pqosc/math/integrate.hpp"
#include "pqosc/spectral.hpp"

using namespace pqosc;

namespace {

PhysicalParams drude_params() {
    PhysicalParams p;
    p.omega0 = 1.0;
    p.beta_tb = 1.0;
    p.gamma_tb = 0.1;
    p.cutoff_tb = 10.0;
    return p;
}

} // namespace

TEST_CASE("spectral densities carry the declared low-frequency slopes") {
    PhysicalParams p = drude_params();
    // ohmic: J(w) -> m gamma w as w -> 0
    REQUIRE(spectral_density_tb(1e-6, p) ==
            Catch::Approx(p.mass * p.gamma_tb * 1e-6).epsilon(1e-10));
    // cutoff halves the density at w = cutoff
    REQUIRE(spectral_density_tb(p.cutoff_tb, p) ==
            Catch::Approx(0.5 * p.mass * p.gamma_tb * p.cutoff_tb).epsilon(1e-12));

    p.bb_enabled = true;
    p.tau_bb = 1e-3;
    p.cutoff_bb = 20.0;
    // supraohmic: J_bb(w) -> M tau w^3 as w -> 0
    const double m_ren = p.renormalized_mass();
    REQUIRE(spectral_density_bb(1e-4, p) ==
            Catch::Approx(m_ren * p.tau_bb * 1e-12).epsilon(1e-7));
}

TEST_CASE("damping kernel splits and their memory composition") {
    PhysicalParams p = drude_params();
    const DampingKernelSplit tb = damping_kernel_tb(p);
    REQUIRE(tb.local_coeff == 0.0);
    REQUIRE(tb.smooth(0.0) == Catch::Approx(p.gamma_tb * p.cutoff_tb));
    REQUIRE(tb.smooth(0.3) ==
            Catch::Approx(p.gamma_tb * p.cutoff_tb * std::exp(-3.0)));

    const DampingKernelSplit mk = damping_kernel_markovian(0.25);
    REQUIRE(mk.local_coeff == Catch::Approx(0.25));
    REQUIRE_FALSE(mk.has_smooth());

    p.bb_enabled = true;
    p.tau_bb = 1e-2;
    p.cutoff_bb = 5.0;
    const DampingKernelSplit bb = damping_kernel_bb(p);
    // instantaneous part tau W^2, smooth part -tau W^3 e^{-W s}
    REQUIRE(bb.local_coeff == Catch::Approx(p.tau_bb * 25.0));
    REQUIRE(bb.smooth(0.0) == Catch::Approx(-p.tau_bb * 125.0));

    const MemoryKernel total = total_damping_kernel(p);
    REQUIRE(total.local_coeff == Catch::Approx(bb.local_coeff));
    REQUIRE(total.smooth(0.7) == Catch::Approx(tb.smooth(0.7) + bb.smooth(0.7)));
}

TEST_CASE("matsubara components at s = 0") {
    PhysicalParams p = drude_params();
    const MatsubaraComponents mc(p);
    const double W = p.cutoff_tb;
    for (long n : {1L, 3L, 17L}) {
        const double nu = 2.0 * M_PI * double(n) / (p.hbar * p.beta_tb);
        REQUIRE(mc.nu(n) == Catch::Approx(nu).epsilon(1e-14));
        REQUIRE(mc.zeta0(n) ==
                Catch::Approx(p.gamma_tb * W * nu / (W + nu)).epsilon(1e-13));
        const ExpPair g = mc.g_pair(n), f = mc.f_pair(n);
        // g_n(0) = gamma W^2 / (W + nu_n), f_n(0) = 0
        REQUIRE(g(0.0) ==
                Catch::Approx(p.gamma_tb * W * W / (W + nu)).epsilon(1e-12));
        REQUIRE(f(0.0) == Catch::Approx(0.0).margin(1e-12));
        // the pair decomposition resums to the bare kernel:
        // zeta_n(s) + g_n(s) = gamma W e^{-W s} at every s
        for (double s : {0.0, 0.4, 1.3})
            REQUIRE(mc.zeta_pair(n)(s) + g(s) ==
                    Catch::Approx(p.gamma_tb * W * std::exp(-W * s)).epsilon(1e-10));
    }
}

TEST_CASE("mode kernels agree with the direct spectral integral") {
    PhysicalParams p = drude_params();
    const MatsubaraComponents mc(p);
    for (long n : {1L, 4L}) {
        for (double s : {0.1, 0.8, 2.5}) {
            const double ref = zeta_quadrature(p, n, s);
            REQUIRE(mc.zeta_pair(n)(s) == Catch::Approx(ref).margin(1e-8));
        }
    }
}

TEST_CASE("degenerate matsubara frequency stays finite near the cutoff") {
    // choose beta so that nu_2 = cutoff: 2 pi 2 / beta = 10 -> beta = 0.4 pi
    PhysicalParams p = drude_params();
    p.beta_tb = 0.4 * M_PI;
    const MatsubaraComponents mc(p);
    const ExpPair g = mc.g_pair(2);
    for (double s : {0.0, 0.3, 1.0}) {
        REQUIRE(std::isfinite(g(s)));
        // degenerate limit of gamma W^2 (nu e^{-nu s} - W e^{-W s})/(nu^2 - W^2)
        // is gamma W (1 - W s) e^{-W s} / 2 at nu == W
        const double ref = 0.5 * p.gamma_tb * p.cutoff_tb * (1.0 - p.cutoff_tb * s) *
                           std::exp(-p.cutoff_tb * s);
        REQUIRE(g(s) == Catch::Approx(ref).epsilon(1e-4));
    }
}

TEST_CASE("adaptive truncation reaches the declared tail tolerance") {
    PhysicalParams p = drude_params();
    TimeGrid grid;
    grid.t_max = 2.0;
    grid.n_steps = 100;
    MatsubaraOptions opts;
    opts.store_sampled = false;
    const MatsubaraTable t = build_matsubara(p, grid, opts);
    REQUIRE(t.n_terms >= 64);
    REQUIRE(t.tail_applied);

    MatsubaraOptions big = opts;
    big.force_n = 8 * t.n_terms;
    const MatsubaraTable tb = build_matsubara(p, grid, big);
    REQUIRE(t.lambda_tb == Catch::Approx(tb.lambda_tb).epsilon(1e-8));
    REQUIRE(t.omega_eq == Catch::Approx(tb.omega_eq).epsilon(1e-8));
}

TEST_CASE("equilibrium sums against brute-force mode summation") {
    PhysicalParams p = drude_params();
    TimeGrid grid;
    grid.t_max = 1.0;
    grid.n_steps = 10;
    MatsubaraOptions opts;
    opts.store_sampled = false;
    opts.force_n = 400000;   // brute force: applied tails shrink to ~1e-12
    opts.n_cap = opts.force_n;
    const MatsubaraTable brute = build_matsubara(p, grid, opts);
    MatsubaraOptions small = opts;
    small.force_n = 0;
    const MatsubaraTable t = build_matsubara(p, grid, small);
    REQUIRE(t.lambda_tb == Catch::Approx(brute.lambda_tb).epsilon(1e-9));
    REQUIRE(t.omega_eq == Catch::Approx(brute.omega_eq).epsilon(1e-7));
}

TEST_CASE("sampled kernel matrices carry the pair values") {
    PhysicalParams p = drude_params();
    TimeGrid grid;
    grid.t_max = 1.0;
    grid.n_steps = 20;
    MatsubaraOptions opts;
    opts.force_n = 80;
    const MatsubaraTable t = build_matsubara(p, grid, opts);
    REQUIRE(t.g_s.rows() == 21);
    REQUIRE(t.g_s.cols() == 81);
    const MatsubaraComponents mc(p);
    REQUIRE(t.g_s(5, 3) == Catch::Approx(mc.g_pair(3)(t.time(5))).epsilon(1e-13));
    REQUIRE(t.f_s(5, 3) == Catch::Approx(mc.f_pair(3)(t.time(5))).epsilon(1e-13));
    REQUIRE(t.zeta_s(5, 0) == 0.0);
    REQUIRE(t.g_s(5, 0) ==
            Catch::Approx(p.gamma_tb * p.cutoff_tb *
                          std::exp(-p.cutoff_tb * t.time(5))).epsilon(1e-13));
}

TEST_CASE("equilibrium moments are positive and hbar-consistent") {
    PhysicalParams p = drude_params();
    TimeGrid grid;
    grid.t_max = 1.0;
    grid.n_steps = 10;
    MatsubaraOptions opts;
    opts.store_sampled = false;
    const MatsubaraTable t = build_matsubara(p, grid, opts);
    const EquilibriumMoments em = equilibrium_moments(t);
    REQUIRE(em.qq > 0.0);
    REQUIRE(em.pp > 0.0);
    REQUIRE(em.qq == Catch::Approx(p.hbar * t.lambda_tb / p.mass).epsilon(1e-14));
    REQUIRE(em.pp == Catch::Approx(p.hbar * p.mass * t.omega_eq).epsilon(1e-14));
    // never below the free-oscillator ground state
    REQUIRE(em.qq * em.pp >= 0.25 * p.hbar * p.hbar);
}
