#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pqosc/oracles.hpp"

using namespace pqosc;

TEST_CASE("transform-domain fundamentals: undamped corner is exact") {
    const auto d = oracles::laplace_drude(1.3, 0.0, 7.0);
    for (double s : {0.0, 0.4, 1.9, 5.2}) {
        REQUIRE(d.phi1(s) ==
                Catch::Approx(std::sin(1.3 * s) / 1.3).margin(1e-10));
        REQUIRE(d.phi2(s) == Catch::Approx(std::cos(1.3 * s)).margin(1e-10));
        REQUIRE(d.dphi1(s) == Catch::Approx(std::cos(1.3 * s)).margin(1e-10));
    }
}

TEST_CASE("transform-domain fundamentals approach the memoryless limit") {
    // huge cutoff: the residue sum must collapse onto the markovian forms
    const double w0 = 1.0, g = 0.2, W = 4000.0;
    const auto d = oracles::laplace_drude(w0, g, W);
    for (double s : {0.5, 2.0, 6.0}) {
        REQUIRE(d.phi1(s) ==
                Catch::Approx(oracles::markovian_phi1(w0, g, s)).margin(2e-3));
    }
}

TEST_CASE("transform-domain fundamentals survive root confluence") {
    // (omega0^2, gamma, cutoff) = (0.8, 1.62, 10) puts an exact double root at
    // z = -1 next to a simple root at z = -8; the closed confluent form is
    // phi1 = (9/7) s e^{-s} - (2/49) e^{-s} + (2/49) e^{-8s}
    const auto d = oracles::laplace_drude(std::sqrt(0.8), 1.62, 10.0);
    for (double s : {0.0, 0.3, 1.0, 3.0}) {
        const double ref = (9.0 / 7.0) * s * std::exp(-s) -
                           (2.0 / 49.0) * std::exp(-s) +
                           (2.0 / 49.0) * std::exp(-8.0 * s);
        REQUIRE(std::isfinite(d.phi1(s)));
        REQUIRE(d.phi1(s) == Catch::Approx(ref).margin(1e-5));
    }
}

TEST_CASE("markovian phi1 is continuous through critical damping") {
    const double w0 = 1.0;
    const double below = oracles::markovian_phi1(w0, 2.0 * w0 * (1.0 - 1e-9), 1.3);
    const double above = oracles::markovian_phi1(w0, 2.0 * w0 * (1.0 + 1e-9), 1.3);
    REQUIRE(below == Catch::Approx(above).margin(1e-7));
    // overdamped closed form at one point
    const double g = 3.0;
    const double om = std::sqrt(g * g / 4.0 - w0 * w0);
    const double ref = std::exp(-0.5 * g * 1.0) * std::sinh(om) / om;
    REQUIRE(oracles::markovian_phi1(w0, g, 1.0) == Catch::Approx(ref).epsilon(1e-12));
}

TEST_CASE("driven-mean oracle reproduces the resonant envelope") {
    const double w0 = 1.0, g = 0.1, m = 1.0, e0 = 0.3;
    const auto phi1 = [&](double s) { return oracles::markovian_phi1(w0, g, s); };
    const auto force = [&](double s) { return e0 * std::sin(w0 * s); };
    // on resonance the response is -(e0/(m g w0)) cos(w0 t) with the envelope
    // filling in as (1 - e^{-g t / 2}); a quarter-period pair reads off the
    // amplitude without pinning the oscillation phase
    const double t = 60.0;
    const double qa = oracles::classical_driven_mean(phi1, force, m, t, w0);
    const double qb = oracles::classical_driven_mean(
        phi1, force, m, t + 0.5 * M_PI / w0, w0);
    const double amp = std::hypot(qa, qb);
    const double env = e0 / (m * g * w0) * (1.0 - std::exp(-0.5 * g * t));
    REQUIRE(amp == Catch::Approx(env).epsilon(1.5e-2));
}

TEST_CASE("covariance relaxation holds its fixed point and attracts") {
    const double m = 1.0, w0 = 1.0, g = 0.2, kT = 7.0;
    std::vector<double> times{1.0, 5.0, 25.0};
    const auto fixed = oracles::markovian_covariance(m, w0, g, kT, kT / (w0 * w0),
                                                     0.0, m * kT, times);
    for (const auto& pt : fixed) {
        REQUIRE(pt.qq == Catch::Approx(kT).epsilon(1e-9));
        REQUIRE(pt.pp == Catch::Approx(kT).epsilon(1e-9));
        REQUIRE(pt.qp == Catch::Approx(0.0).margin(1e-9));
    }
    std::vector<double> late{80.0};
    const auto relax =
        oracles::markovian_covariance(m, w0, g, kT, 5.0 * kT, 0.0, m * kT, late);
    REQUIRE(relax.back().qq == Catch::Approx(kT).epsilon(1e-5));
}

TEST_CASE("noise-kernel quadrature rejects the singular point") {
    PhysicalParams p;
    p.gamma_tb = 0.1;
    REQUIRE_THROWS_AS(oracles::k_tb_quadrature(p, 0.0), NumericalError);
    REQUIRE_THROWS_AS(oracles::k_tb_quadrature(p, -1.0), NumericalError);
    REQUIRE(std::isfinite(oracles::k_tb_quadrature(p, 0.05)));
}

TEST_CASE("parametric growth rate crosses zero at the analytic threshold") {
    const double w0 = 1.0, g = 0.1, hc = 2.0 * g / w0;
    // the strobe runs at the drive period pi/w0, not the damped period, so the
    // fitted slope carries an O(g^2/w0) beat residue on top of -g/2
    REQUIRE(oracles::parametric_growth_rate(w0, g, 0.0, 150.0) ==
            Catch::Approx(-0.5 * g).margin(2e-4));
    REQUIRE(oracles::parametric_growth_rate(w0, g, 0.5 * hc, 300.0) < 0.0);
    REQUIRE(oracles::parametric_growth_rate(w0, g, 2.0 * hc, 300.0) > 0.0);
}

TEST_CASE("langevin sampler: deterministic seeding and equipartition") {
    const double m = 1.0, w0 = 1.0, g = 0.3, W = 30.0, kT = 4.0;
    std::vector<double> times{2.0, 8.0};
    const auto a =
        oracles::langevin_drude_classical(m, w0, g, W, kT, times, 1500, 2e-3);
    const auto b =
        oracles::langevin_drude_classical(m, w0, g, W, kT, times, 1500, 2e-3);
    REQUIRE(a.qq == b.qq);
    REQUIRE(a.pp == b.pp);
    // started in canonical equilibrium; stays there within MC error (~5%)
    for (std::size_t i = 0; i < times.size(); ++i) {
        REQUIRE(a.qq[i] == Catch::Approx(kT / (m * w0 * w0)).epsilon(0.15));
        REQUIRE(a.pp[i] == Catch::Approx(m * kT).epsilon(0.15));
    }
}
