#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pqosc/config.hpp"
#include "pqosc/errors.hpp"
#include "pqosc/math/parallel.hpp"
#include "pqosc/model.hpp"
#include "pqosc/moments.hpp"
#include "pqosc/noise.hpp"
#include "pqosc/propagator.hpp"
#include "pqosc/spectral.hpp"

namespace pqosc {

struct RunDiagnostics {
    long matsubara_n = 0;
    double lambda = 0.0, omega_eq = 0.0;
    double tail_lambda = 0.0, tail_omega = 0.0;
    double solver_convergence = 0.0;
    double bb_quad_rel_err = 0.0;
    double omega_window = 0.0;
    // residual of the stationarity identity Omega_eq = Lambda*(w0^2 + zeta(0) - C1(0));
    // a cheap cross-check of the assembled sums on every run
    double equilibrium_identity_residual = 0.0;
    std::vector<std::string> warnings;
};

struct SimulationResult {
    std::vector<GaussianState> states;           // t = 0 equilibrium row first
    std::vector<std::size_t> snapshot_indices;   // grid indices of states[1..]
    RunDiagnostics diag;
    RFundamental rf;
    std::vector<XFundamental> x_dumps;           // filled only when requested
    std::vector<DensityMatrixSlice> density;     // filled only when requested
};

inline double equilibrium_identity_residual(const PhysicalParams& p,
                                            const MatsubaraTable& mats,
                                            const NoiseTable& nt) {
    const double zeta_inf = p.gamma_tb * p.cutoff_tb;
    const double rhs = mats.lambda_tb * (p.omega0 * p.omega0 + zeta_inf - nt.c1_pt[0]);
    return std::abs(mats.omega_eq - rhs) / std::abs(mats.omega_eq);
}

/// Full run: parameter validation, equilibrium sums, noise tables, fundamental
/// solutions, then the snapshot moments in parallel. Shared tables are
/// read-only after construction; snapshots never interact.
inline SimulationResult run_simulation(const RunConfig& cfg,
                                       bool keep_x_dumps = false) {
    SimulationResult res;
    res.diag.warnings = validate(cfg.params, cfg.drive, cfg.grid);

    MatsubaraOptions mopts = cfg.matsubara;
    mopts.store_sampled = false;   // sampled per-mode kernels only serve dumps
    const MatsubaraTable mats = build_matsubara(cfg.params, cfg.grid, mopts);

    NoiseOptions nopts = cfg.noise;
    nopts.build_r = false;         // moment quadratic forms are evaluated per
                                   // snapshot in exact sub-range cell form
    const NoiseTable nt = build_noise_table(cfg.params, cfg.grid, mats, nopts);

    res.diag.matsubara_n = mats.n_terms;
    res.diag.lambda = mats.lambda_tb;
    res.diag.omega_eq = mats.omega_eq;
    res.diag.tail_lambda = mats.tail_lambda;
    res.diag.tail_omega = mats.tail_omega;
    res.diag.bb_quad_rel_err = nt.bb_quad_rel_err;
    res.diag.omega_window = nt.omega_window;
    res.diag.equilibrium_identity_residual =
        equilibrium_identity_residual(cfg.params, mats, nt);

    const MemoryKernel kernel = total_damping_kernel(cfg.params);
    res.rf = solve_r_fundamental(cfg.params, cfg.drive, kernel, cfg.grid,
                                 cfg.solver.convergence_check,
                                 cfg.solver.convergence_tol);
    res.diag.solver_convergence = res.rf.convergence;

    const FunctionalBasis fb = build_functional_basis(cfg.params, mats, nt);

    std::vector<double> w2(cfg.grid.n_points());
    for (std::size_t i = 0; i < w2.size(); ++i)
        w2[i] = cfg.drive.omega_sq(cfg.grid.time(i), cfg.params);

    res.snapshot_indices = cfg.grid.snapshot_indices();
    const std::size_t ns = res.snapshot_indices.size();

    std::vector<GaussianState> snap(ns);
    std::vector<std::vector<std::string>> snap_warn(ns);
    std::vector<XFundamental> xfs(keep_x_dumps ? ns : 0);
    parallel_for(ns, [&](std::size_t k) {
        const std::size_t idx = res.snapshot_indices[k];
        XFundamental xf =
            solve_x_fundamental(kernel, w2, cfg.grid.h(), idx);
        const VUAssembly vu = assemble_vu(res.rf, xf, cfg.solver.caustic_tol);
        snap[k] = snapshot_state(cfg.params, cfg.drive, fb, vu, cfg.moments,
                                 &snap_warn[k]);
        if (keep_x_dumps) xfs[k] = std::move(xf);
    });

    res.states.push_back(equilibrium_state(cfg.params, mats));
    res.states.insert(res.states.end(), snap.begin(), snap.end());
    for (auto& wl : snap_warn)
        res.diag.warnings.insert(res.diag.warnings.end(), wl.begin(), wl.end());
    res.x_dumps = std::move(xfs);

    if (cfg.output.density_matrix) {
        res.density.reserve(res.states.size());
        for (const GaussianState& st : res.states)
            res.density.push_back(sample_density_matrix(
                st, cfg.params, cfg.output.density_matrix_points,
                cfg.output.density_matrix_sigma));
    }
    return res;
}

} // namespace pqosc
