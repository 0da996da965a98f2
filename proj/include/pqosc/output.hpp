#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pqosc/errors.hpp"
#include "pqosc/moments.hpp"
#include "pqosc/propagator.hpp"
#include "pqosc/spectral.hpp"

namespace pqosc {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Write-to-temp-then-rename; a crashed or failed run never leaves a partial
/// file under the final name.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw ConfigError("cannot write '" + tmp.string() + "'");
        f << content;
        if (!f) throw ConfigError("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw ConfigError("cannot rename '" + tmp.string() + "' to '" +
                              path.string() + "': " + ec.message());
}

inline std::string moments_csv(const std::vector<GaussianState>& states) {
    std::string out = "t,meanQ,meanP,sqq,sqp,spp,uncertaintyProduct,flags\n";
    for (const GaussianState& s : states) {
        out += fmt17(s.t) + ',' + fmt17(s.mean_q) + ',' + fmt17(s.mean_p) + ',' +
               fmt17(s.cov_qq) + ',' + fmt17(s.cov_pq) + ',' + fmt17(s.cov_pp) + ',' +
               fmt17(s.uncertainty_product()) + ',' +
               (s.physical ? "ok" : "uncertainty_below_floor") + '\n';
    }
    return out;
}

inline std::string density_matrix_csv(const DensityMatrixSlice& d) {
    std::string out = "r,x,reRho,imRho\n";
    for (long i = 0; i < d.x.size(); ++i)
        for (long j = 0; j < d.x.size(); ++j)
            out += fmt17(d.x[i]) + ',' + fmt17(d.x[j]) + ',' +
                   fmt17(d.rho(i, j).real()) + ',' + fmt17(d.rho(i, j).imag()) + '\n';
    return out;
}

inline std::string fundamentals_csv(const RFundamental& rf) {
    std::string out = "s,phi1,dphi1,phi2,dphi2\n";
    for (std::size_t i = 0; i < rf.phi1.n_points(); ++i)
        out += fmt17(rf.phi1.h * double(i)) + ',' + fmt17(rf.phi1.y[i]) + ',' +
               fmt17(rf.phi1.dy[i]) + ',' + fmt17(rf.phi2.y[i]) + ',' +
               fmt17(rf.phi2.dy[i]) + '\n';
    return out;
}

inline std::string x_fundamentals_csv(const XFundamental& xf) {
    std::string out = "s,phi1x,dphi1x,phi2x,dphi2x\n";
    for (std::size_t i = 0; i < xf.phi1x.n_points(); ++i)
        out += fmt17(xf.phi1x.h * double(i)) + ',' + fmt17(xf.phi1x.y[i]) + ',' +
               fmt17(xf.phi1x.dy[i]) + ',' + fmt17(xf.phi2x.y[i]) + ',' +
               fmt17(xf.phi2x.dy[i]) + '\n';
    return out;
}

/// Per-mode kernel column (s, value, n) for one sampled kernel family.
inline std::string mode_kernel_csv(const MatsubaraTable& t, const Eigen::MatrixXd& m,
                                   long n_lo, long n_hi) {
    std::string out = "s,value,n\n";
    for (long n = n_lo; n <= n_hi; ++n)
        for (std::size_t i = 0; i < t.n_points; ++i)
            out += fmt17(t.time(i)) + ',' + fmt17(m(long(i), n)) + ',' +
                   std::to_string(n) + '\n';
    return out;
}

inline std::string noise_kernels_csv(const NoiseTable& nt) {
    std::string out = "s,kTbRe,kBbThermal,kBbVacuum,c1,c2,c1TildeSmooth\n";
    for (std::size_t i = 0; i < nt.n_points; ++i)
        out += fmt17(nt.time(i)) + ',' + fmt17(nt.k_tb_re_pt[long(i)]) + ',' +
               fmt17(nt.k_bb_thermal_pt[long(i)]) + ',' +
               fmt17(nt.k_bb_vacuum_pt[long(i)]) + ',' + fmt17(nt.c1_pt[long(i)]) +
               ',' + fmt17(nt.c2_pt[long(i)]) + ',' +
               fmt17(nt.c1t_smooth_pt[long(i)]) + '\n';
    return out;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    atomic_write(path, j.dump(2) + "\n");
}

} // namespace pqosc
