#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "pqosc/errors.hpp"

namespace pqosc {

/// Static system + bath parameters. Units are free as long as they are
/// consistent; hbar and kB are carried explicitly so SI and natural-unit
/// configs both work.
struct PhysicalParams {
    double mass = 1.0;
    double omega0 = 1.0;      // bare oscillator frequency
    double hbar = 1.0;
    double k_boltzmann = 1.0;

    double beta_tb = 1.0;     // inverse temperature of the contact bath
    double gamma_tb = 0.0;    // friction strength (Drude)
    double cutoff_tb = 10.0;  // Drude cutoff

    bool bb_enabled = false;
    double tau_bb = 0.0;      // radiation reaction time constant
    double beta_bb = 1.0;     // inverse temperature of the radiation field (inf = vacuum)
    double cutoff_bb = 10.0;

    /// Dressed mass produced by the field coupling; finite only below the
    /// causality bound tau_bb*cutoff_bb < 1.
    double renormalized_mass() const {
        const double d = 1.0 - tau_bb * cutoff_bb;
        return mass / d;
    }
};

enum class DriveKind { zero, harmonic, gauss_pulse, tabulated };

/// One scalar drive profile. Evaluation is pure: same (profile, s) always
/// yields the same value.
struct DriveProfile {
    DriveKind kind = DriveKind::zero;
    double amplitude = 0.0;
    double frequency = 0.0;   // harmonic: angular frequency; pulse: carrier
    double phase = 0.0;       // harmonic only
    double center = 0.0;      // pulse only
    double width = 1.0;       // pulse only
    std::vector<double> knot_s;      // tabulated, strictly increasing
    std::vector<double> knot_value;

    double operator()(double s) const {
        switch (kind) {
        case DriveKind::zero:
            return 0.0;
        case DriveKind::harmonic:
            return amplitude * std::sin(frequency * s + phase);
        case DriveKind::gauss_pulse: {
            const double u = (s - center) / width;
            return amplitude * std::exp(-0.5 * u * u) * std::cos(frequency * (s - center));
        }
        case DriveKind::tabulated: {
            if (knot_s.empty()) return 0.0;
            if (s <= knot_s.front()) return knot_value.front();
            if (s >= knot_s.back()) return knot_value.back();
            const auto it = std::upper_bound(knot_s.begin(), knot_s.end(), s);
            const std::size_t j = std::size_t(it - knot_s.begin());
            const double t = (s - knot_s[j - 1]) / (knot_s[j] - knot_s[j - 1]);
            return knot_value[j - 1] + t * (knot_value[j] - knot_value[j - 1]);
        }
        }
        return 0.0;
    }

    /// Fastest scale present, for the grid resolution guard.
    double frequency_scale() const {
        switch (kind) {
        case DriveKind::zero: return 0.0;
        case DriveKind::harmonic: return std::abs(frequency);
        case DriveKind::gauss_pulse:
            return std::max(std::abs(frequency), width > 0.0 ? 1.0 / width : 0.0);
        case DriveKind::tabulated: {
            double dmin = 0.0;
            for (std::size_t i = 1; i < knot_s.size(); ++i) {
                const double d = knot_s[i] - knot_s[i - 1];
                if (dmin == 0.0 || d < dmin) dmin = d;
            }
            return dmin > 0.0 ? 1.0 / dmin : 0.0;
        }
        }
        return 0.0;
    }
};

/// External driving: a linear force (laser field) and a parametric frequency
/// modulation added to omega0^2. Both must vanish at s = 0, where the system
/// is still in unperturbed equilibrium with its bath.
struct DriveSpec {
    DriveProfile laser;        // E_L(s), force units
    DriveProfile parametric;   // omega_P^2(s), frequency-squared units

    double omega_sq(double s, const PhysicalParams& p) const {
        return p.omega0 * p.omega0 + parametric(s);
    }
};

/// Uniform time grid on [0, t_max] with n_steps cells and a snapshot subset
/// at which the reduced state is reported.
struct TimeGrid {
    double t_max = 10.0;
    std::size_t n_steps = 1000;
    std::size_t n_snapshots = 50;

    double h() const { return t_max / double(n_steps); }
    std::size_t n_points() const { return n_steps + 1; }
    double time(std::size_t i) const { return t_max * double(i) / double(n_steps); }

    /// Evenly spaced snapshot indices in (0, n_steps]; t = 0 is reported
    /// separately from the equilibrium state.
    std::vector<std::size_t> snapshot_indices() const {
        std::vector<std::size_t> idx;
        const std::size_t k = std::min<std::size_t>(n_snapshots ? n_snapshots : 1, n_steps);
        idx.reserve(k);
        for (std::size_t j = 1; j <= k; ++j) {
            std::size_t i = (n_steps * j) / k;
            if (i == 0) i = 1;
            if (idx.empty() || i != idx.back()) idx.push_back(i);
        }
        return idx;
    }
};

namespace detail {
inline void require(bool ok, const std::string& what) {
    if (!ok) throw PhysicsError(what);
}
} // namespace detail

/// Validates the full parameter/drive/grid set. Hard violations throw
/// PhysicsError; soft issues (resolution guard) are returned as warnings.
inline std::vector<std::string> validate(const PhysicalParams& p, const DriveSpec& d,
                                         const TimeGrid& g) {
    using detail::require;
    require(p.mass > 0.0, "mass must be positive");
    require(p.omega0 > 0.0, "omega0 must be positive");
    require(p.hbar > 0.0, "hbar must be positive");
    require(p.k_boltzmann > 0.0, "kB must be positive");
    require(p.beta_tb > 0.0 && std::isfinite(p.beta_tb), "bath.beta must be positive and finite");
    require(p.gamma_tb >= 0.0, "bath.gamma must be non-negative");
    require(p.cutoff_tb > 0.0, "bath.cutoff must be positive");
    require(p.cutoff_tb <= 1e3 * p.omega0,
            "bath.cutoff > 1e3*omega0 is outside the supported stiffness range; "
            "rescale time units so the cutoff shrinks");
    if (p.bb_enabled) {
        require(p.tau_bb >= 0.0, "bb.tau must be non-negative");
        require(p.cutoff_bb > 0.0, "bb.cutoff must be positive");
        require(p.tau_bb * p.cutoff_bb < 1.0,
                "bb.tau*bb.cutoff must stay below 1 (renormalized mass would diverge)");
        require(p.beta_bb > 0.0, "bb.beta must be positive (may be inf for the vacuum)");
        require(p.cutoff_bb <= 1e3 * p.omega0,
                "bb.cutoff > 1e3*omega0 is outside the supported stiffness range");
    }
    require(g.t_max > 0.0, "grid.t_max must be positive");
    require(g.n_steps >= 16, "grid.n_steps must be at least 16");
    require(g.n_snapshots >= 1, "grid.snapshots must be at least 1");

    const double scale0 = std::max(std::abs(d.laser.amplitude), 1.0);
    require(std::abs(d.laser(0.0)) <= 1e-10 * scale0,
            "laser drive must vanish at t = 0");
    const double scalep = std::max(std::abs(d.parametric.amplitude), 1.0);
    require(std::abs(d.parametric(0.0)) <= 1e-10 * scalep,
            "parametric modulation must vanish at t = 0");
    for (const DriveProfile* prof : {&d.laser, &d.parametric}) {
        if (prof->kind == DriveKind::tabulated) {
            require(prof->knot_s.size() >= 2 && prof->knot_s.size() == prof->knot_value.size(),
                    "tabulated drive needs >= 2 (s, value) knots");
            for (std::size_t i = 1; i < prof->knot_s.size(); ++i)
                require(prof->knot_s[i] > prof->knot_s[i - 1],
                        "tabulated drive knots must be strictly increasing");
        }
        if (prof->kind == DriveKind::gauss_pulse)
            require(prof->width > 0.0, "pulse width must be positive");
    }

    std::vector<std::string> warnings;
    double fmax = std::max(p.omega0, p.cutoff_tb);
    if (p.bb_enabled) fmax = std::max(fmax, p.cutoff_bb);
    fmax = std::max({fmax, d.laser.frequency_scale(), d.parametric.frequency_scale()});
    if (g.h() * fmax > 0.2) {
        std::ostringstream os;
        os << "grid resolution marginal: h*fmax = " << g.h() * fmax
           << " > 0.2; increase grid.n_steps";
        warnings.push_back(os.str());
    }
    return warnings;
}

} // namespace pqosc
