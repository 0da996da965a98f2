#include <catch2/catch_amalgamated.hpp>

#include "pqosc/model.hpp"

using namespace pqosc;

TEST_CASE("time grid spacing and snapshot layout") {
    TimeGrid g;
    g.t_max = 4.0;
    g.n_steps = 200;
    g.n_snapshots = 8;
    REQUIRE(g.h() == Catch::Approx(0.02));
    REQUIRE(g.n_points() == 201);
    REQUIRE(g.time(0) == 0.0);
    REQUIRE(g.time(200) == Catch::Approx(4.0));

    const auto idx = g.snapshot_indices();
    REQUIRE(idx.size() == 8);
    REQUIRE(idx.back() == 200);
    for (std::size_t k = 1; k < idx.size(); ++k) REQUIRE(idx[k] > idx[k - 1]);
}

TEST_CASE("snapshot count is capped by the step count") {
    TimeGrid g;
    g.n_steps = 5;
    g.n_snapshots = 50;
    REQUIRE(g.snapshot_indices().size() == 5);
}

TEST_CASE("drive profiles evaluate their shapes") {
    DriveProfile zero;
    REQUIRE(zero(1.23) == 0.0);

    DriveProfile h;
    h.kind = DriveKind::harmonic;
    h.amplitude = 2.0;
    h.frequency = 3.0;
    h.phase = 0.5;
    REQUIRE(h(0.7) == Catch::Approx(2.0 * std::sin(3.0 * 0.7 + 0.5)));

    DriveProfile gp;
    gp.kind = DriveKind::gauss_pulse;
    gp.amplitude = 1.5;
    gp.center = 2.0;
    gp.width = 0.3;
    REQUIRE(gp(2.0) == Catch::Approx(1.5));
    REQUIRE(gp(2.3) == Catch::Approx(1.5 * std::exp(-0.5)));
    REQUIRE(gp(20.0) < 1e-300);

    DriveProfile tab;
    tab.kind = DriveKind::tabulated;
    tab.knot_s = {0.0, 1.0, 2.0};
    tab.knot_value = {0.0, 2.0, 0.0};
    REQUIRE(tab(0.5) == Catch::Approx(1.0));
    REQUIRE(tab(1.5) == Catch::Approx(1.0));
    REQUIRE(tab(5.0) == 0.0);   // clamped outside the table
}

TEST_CASE("parametric drive modulates the squared frequency") {
    PhysicalParams p;
    p.omega0 = 2.0;
    DriveSpec d;
    d.parametric.kind = DriveKind::harmonic;
    d.parametric.amplitude = 0.3;
    d.parametric.frequency = 4.0;
    REQUIRE(d.omega_sq(0.0, p) == Catch::Approx(4.0));
    REQUIRE(d.omega_sq(0.4, p) == Catch::Approx(4.0 + 0.3 * std::sin(1.6)));
}

TEST_CASE("validation rejects unphysical parameters") {
    PhysicalParams p;
    DriveSpec d;
    TimeGrid g;
    REQUIRE_NOTHROW(validate(p, d, g));

    PhysicalParams bad = p;
    bad.mass = -1.0;
    REQUIRE_THROWS_AS(validate(bad, d, g), PhysicsError);

    bad = p;
    bad.gamma_tb = -0.1;
    REQUIRE_THROWS_AS(validate(bad, d, g), PhysicsError);

    bad = p;
    bad.beta_tb = 0.0;
    REQUIRE_THROWS_AS(validate(bad, d, g), PhysicsError);

    bad = p;
    bad.bb_enabled = true;
    bad.tau_bb = 0.2;
    bad.cutoff_bb = 10.0;   // tau * cutoff >= 1: runaway mass renormalization
    REQUIRE_THROWS_AS(validate(bad, d, g), PhysicsError);

    TimeGrid bad_grid = g;
    bad_grid.n_steps = 0;
    REQUIRE_THROWS_AS(validate(p, d, bad_grid), PhysicsError);
}

TEST_CASE("mass renormalization by the radiation coupling") {
    PhysicalParams p;
    p.mass = 2.0;
    REQUIRE(p.renormalized_mass() == Catch::Approx(2.0));
    p.bb_enabled = true;
    p.tau_bb = 0.01;
    p.cutoff_bb = 10.0;
    REQUIRE(p.renormalized_mass() == Catch::Approx(2.0 / 0.9));
}
