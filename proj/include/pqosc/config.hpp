#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pqosc/errors.hpp"
#include "pqosc/model.hpp"
#include "pqosc/moments.hpp"
#include "pqosc/noise.hpp"
#include "pqosc/spectral.hpp"

namespace pqosc {

struct SolverOptions {
    bool convergence_check = true;
    double convergence_tol = 1e-3;
    double caustic_tol = 1e-8;
};

struct OutputOptions {
    std::string dir = ".";
    std::string prefix = "run";
    bool density_matrix = false;
    std::size_t density_matrix_points = 60;   // half-window point count
    double density_matrix_sigma = 4.0;
    bool dump_fundamentals = false;
};

struct RunConfig {
    PhysicalParams params;
    DriveSpec drive;
    TimeGrid grid;
    MatsubaraOptions matsubara;
    NoiseOptions noise;
    SolverOptions solver;
    MomentOptions moments;
    OutputOptions output;

    // every key with its effective value, defaults included, for the summary
    std::map<std::string, std::string> echo;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& v, const std::string& key, int line) {
    std::string lv = v;
    std::transform(lv.begin(), lv.end(), lv.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    if (lv == "inf" || lv == "infinity") return std::numeric_limits<double>::infinity();
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        std::ostringstream os;
        os << "line " << line << ": key '" << key << "' needs a number, got '" << v << "'";
        throw ConfigError(os.str());
    }
}

inline long parse_long(const std::string& v, const std::string& key, int line) {
    try {
        std::size_t pos = 0;
        const long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        std::ostringstream os;
        os << "line " << line << ": key '" << key << "' needs an integer, got '" << v << "'";
        throw ConfigError(os.str());
    }
}

inline bool parse_bool(const std::string& v, const std::string& key, int line) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    std::ostringstream os;
    os << "line " << line << ": key '" << key << "' needs true/false, got '" << v << "'";
    throw ConfigError(os.str());
}

inline DriveKind parse_kind(const std::string& v, const std::string& key, int line) {
    if (v == "zero") return DriveKind::zero;
    if (v == "harmonic") return DriveKind::harmonic;
    if (v == "gauss_pulse") return DriveKind::gauss_pulse;
    if (v == "tabulated") return DriveKind::tabulated;
    std::ostringstream os;
    os << "line " << line << ": key '" << key
       << "' must be zero|harmonic|gauss_pulse|tabulated, got '" << v << "'";
    throw ConfigError(os.str());
}

inline void load_profile_csv(const std::filesystem::path& path, DriveProfile& prof) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open tabulated profile '" + path.string() + "'");
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::istringstream row(t);
        std::string a, b;
        if (!std::getline(row, a, ',') || !std::getline(row, b)) {
            std::ostringstream os;
            os << path.string() << " line " << ln << ": expected 's,value'";
            throw ConfigError(os.str());
        }
        try {
            const double s = std::stod(trim(a));
            const double v = std::stod(trim(b));
            prof.knot_s.push_back(s);
            prof.knot_value.push_back(v);
        } catch (const std::exception&) {
            if (ln == 1) continue;   // header row
            std::ostringstream os;
            os << path.string() << " line " << ln << ": non-numeric row";
            throw ConfigError(os.str());
        }
    }
    if (prof.knot_s.size() < 2)
        throw ConfigError("tabulated profile '" + path.string() + "' needs >= 2 rows");
}

} // namespace detail

inline const std::set<std::string>& config_schema() {
    static const std::set<std::string> keys = {
        "system.mass", "system.omega0", "system.hbar", "system.kB",
        "bath.beta", "bath.gamma", "bath.cutoff",
        "bb.enabled", "bb.tau", "bb.beta", "bb.cutoff",
        "drive.laser.kind", "drive.laser.amplitude", "drive.laser.frequency",
        "drive.laser.phase", "drive.laser.center", "drive.laser.width",
        "drive.laser.file",
        "drive.parametric.kind", "drive.parametric.amplitude",
        "drive.parametric.frequency", "drive.parametric.phase",
        "drive.parametric.center", "drive.parametric.width",
        "drive.parametric.file",
        "grid.t_max", "grid.n_steps", "grid.snapshots",
        "matsubara.tol", "matsubara.force_n",
        "noise.window_factor", "noise.bb_subtracted",
        "solver.convergence_check", "solver.convergence_tol", "solver.caustic_tol",
        "moments.printed_qq_form", "moments.im_tol",
        "output.dir", "output.prefix", "output.density_matrix",
        "output.density_matrix_points", "output.density_matrix_sigma",
        "output.dump_fundamentals",
    };
    return keys;
}

/// Parse the flat dotted key-value format. Unknown keys, duplicates, and type
/// mismatches are reported with line numbers; required keys by name.
inline RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");

    std::map<std::string, std::pair<std::string, int>> kv;
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << "line " << ln << ": expected 'key = value', got '" << t << "'";
            throw ConfigError(os.str());
        }
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string val = detail::trim(t.substr(eq + 1));
        if (!config_schema().count(key)) {
            std::ostringstream os;
            os << "line " << ln << ": unknown key '" << key << "'";
            throw ConfigError(os.str());
        }
        if (kv.count(key)) {
            std::ostringstream os;
            os << "line " << ln << ": duplicate key '" << key << "' (first at line "
               << kv[key].second << ")";
            throw ConfigError(os.str());
        }
        kv[key] = {val, ln};
    }

    for (const char* req : {"system.omega0", "bath.beta", "bath.gamma",
                            "grid.t_max", "grid.n_steps"})
        if (!kv.count(req))
            throw ConfigError(std::string("missing required key '") + req + "'");

    RunConfig c;
    const auto has = [&](const char* k) { return kv.count(k) != 0; };
    const auto raw = [&](const char* k) { return kv[k].first; };
    const auto lno = [&](const char* k) { return kv[k].second; };
    const auto num = [&](const char* k, double dflt) {
        return has(k) ? detail::parse_double(raw(k), k, lno(k)) : dflt;
    };
    const auto integer = [&](const char* k, long dflt) {
        return has(k) ? detail::parse_long(raw(k), k, lno(k)) : dflt;
    };
    const auto boolean = [&](const char* k, bool dflt) {
        return has(k) ? detail::parse_bool(raw(k), k, lno(k)) : dflt;
    };
    const auto text = [&](const char* k, const std::string& dflt) {
        return has(k) ? raw(k) : dflt;
    };

    c.params.mass = num("system.mass", 1.0);
    c.params.omega0 = num("system.omega0", 1.0);
    c.params.hbar = num("system.hbar", 1.0);
    c.params.k_boltzmann = num("system.kB", 1.0);
    c.params.beta_tb = num("bath.beta", 1.0);
    c.params.gamma_tb = num("bath.gamma", 0.0);
    c.params.cutoff_tb = num("bath.cutoff", 10.0);
    c.params.bb_enabled = boolean("bb.enabled", false);
    c.params.tau_bb = num("bb.tau", 0.0);
    c.params.beta_bb = num("bb.beta", std::numeric_limits<double>::infinity());
    c.params.cutoff_bb = num("bb.cutoff", 10.0);

    const auto fill_profile = [&](const char* base, DriveProfile& prof) {
        const std::string b(base);
        const auto key = [&](const char* leaf) { return b + "." + leaf; };
        const std::string kk = key("kind");
        prof.kind = has(kk.c_str())
                        ? detail::parse_kind(raw(kk.c_str()), kk, lno(kk.c_str()))
                        : DriveKind::zero;
        prof.amplitude = num(key("amplitude").c_str(), 0.0);
        prof.frequency = num(key("frequency").c_str(), 0.0);
        prof.phase = num(key("phase").c_str(), 0.0);
        prof.center = num(key("center").c_str(), 0.0);
        prof.width = num(key("width").c_str(), 1.0);
        const std::string file = text(key("file").c_str(), "");
        if (prof.kind == DriveKind::tabulated) {
            if (file.empty())
                throw ConfigError("key '" + key("file") + "' required for tabulated kind");
            std::filesystem::path fp(file);
            if (fp.is_relative()) fp = path.parent_path() / fp;
            detail::load_profile_csv(fp, prof);
        } else if (!file.empty()) {
            throw ConfigError("key '" + key("file") + "' only valid for tabulated kind");
        }
    };
    fill_profile("drive.laser", c.drive.laser);
    fill_profile("drive.parametric", c.drive.parametric);

    c.grid.t_max = num("grid.t_max", 0.0);
    const long ns = integer("grid.n_steps", 0);
    if (ns <= 0) throw ConfigError("key 'grid.n_steps' must be positive");
    c.grid.n_steps = std::size_t(ns);
    const long nsnap = integer("grid.snapshots", 50);
    if (nsnap <= 0) throw ConfigError("key 'grid.snapshots' must be positive");
    c.grid.n_snapshots = std::size_t(nsnap);

    c.matsubara.tol = num("matsubara.tol", 1e-8);
    c.matsubara.force_n = integer("matsubara.force_n", 0);
    c.noise.window_factor = num("noise.window_factor", 10.0);
    c.noise.bb_subtracted_mode = boolean("noise.bb_subtracted", false);
    c.solver.convergence_check = boolean("solver.convergence_check", true);
    c.solver.convergence_tol = num("solver.convergence_tol", 1e-3);
    c.solver.caustic_tol = num("solver.caustic_tol", 1e-8);
    c.moments.use_printed_qq_form = boolean("moments.printed_qq_form", false);
    c.moments.im_tol = num("moments.im_tol", 1e-8);
    c.output.dir = text("output.dir", ".");
    c.output.prefix = text("output.prefix", "run");
    c.output.density_matrix = boolean("output.density_matrix", false);
    const long dmp = integer("output.density_matrix_points", 60);
    if (dmp <= 0) throw ConfigError("key 'output.density_matrix_points' must be positive");
    c.output.density_matrix_points = std::size_t(dmp);
    c.output.density_matrix_sigma = num("output.density_matrix_sigma", 4.0);
    c.output.dump_fundamentals = boolean("output.dump_fundamentals", false);

    // effective-value echo: every key of the schema, defaults included
    const auto fmt = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (const std::string& k : config_schema()) {
        if (kv.count(k)) {
            c.echo[k] = kv[k].first;
            continue;
        }
        // defaults rendered with the same formatting the parser accepts
        if (k == "system.mass") c.echo[k] = fmt(c.params.mass);
        else if (k == "system.omega0") c.echo[k] = fmt(c.params.omega0);
        else if (k == "system.hbar") c.echo[k] = fmt(c.params.hbar);
        else if (k == "system.kB") c.echo[k] = fmt(c.params.k_boltzmann);
        else if (k == "bath.beta") c.echo[k] = fmt(c.params.beta_tb);
        else if (k == "bath.gamma") c.echo[k] = fmt(c.params.gamma_tb);
        else if (k == "bath.cutoff") c.echo[k] = fmt(c.params.cutoff_tb);
        else if (k == "bb.enabled") c.echo[k] = c.params.bb_enabled ? "true" : "false";
        else if (k == "bb.tau") c.echo[k] = fmt(c.params.tau_bb);
        else if (k == "bb.beta") c.echo[k] = std::isfinite(c.params.beta_bb)
                                                  ? fmt(c.params.beta_bb) : "inf";
        else if (k == "bb.cutoff") c.echo[k] = fmt(c.params.cutoff_bb);
        else if (k == "drive.laser.kind" || k == "drive.parametric.kind")
            c.echo[k] = "zero";
        else if (k == "drive.laser.amplitude" || k == "drive.parametric.amplitude" ||
                 k == "drive.laser.frequency" || k == "drive.parametric.frequency" ||
                 k == "drive.laser.phase" || k == "drive.parametric.phase" ||
                 k == "drive.laser.center" || k == "drive.parametric.center")
            c.echo[k] = "0";
        else if (k == "drive.laser.width" || k == "drive.parametric.width")
            c.echo[k] = "1";
        else if (k == "drive.laser.file" || k == "drive.parametric.file")
            c.echo[k] = "";
        else if (k == "grid.t_max") c.echo[k] = fmt(c.grid.t_max);
        else if (k == "grid.n_steps") c.echo[k] = std::to_string(c.grid.n_steps);
        else if (k == "grid.snapshots") c.echo[k] = std::to_string(c.grid.n_snapshots);
        else if (k == "matsubara.tol") c.echo[k] = fmt(c.matsubara.tol);
        else if (k == "matsubara.force_n") c.echo[k] = std::to_string(c.matsubara.force_n);
        else if (k == "noise.window_factor") c.echo[k] = fmt(c.noise.window_factor);
        else if (k == "noise.bb_subtracted")
            c.echo[k] = c.noise.bb_subtracted_mode ? "true" : "false";
        else if (k == "solver.convergence_check")
            c.echo[k] = c.solver.convergence_check ? "true" : "false";
        else if (k == "solver.convergence_tol") c.echo[k] = fmt(c.solver.convergence_tol);
        else if (k == "solver.caustic_tol") c.echo[k] = fmt(c.solver.caustic_tol);
        else if (k == "moments.printed_qq_form")
            c.echo[k] = c.moments.use_printed_qq_form ? "true" : "false";
        else if (k == "moments.im_tol") c.echo[k] = fmt(c.moments.im_tol);
        else if (k == "output.dir") c.echo[k] = c.output.dir;
        else if (k == "output.prefix") c.echo[k] = c.output.prefix;
        else if (k == "output.density_matrix")
            c.echo[k] = c.output.density_matrix ? "true" : "false";
        else if (k == "output.density_matrix_points")
            c.echo[k] = std::to_string(c.output.density_matrix_points);
        else if (k == "output.density_matrix_sigma")
            c.echo[k] = fmt(c.output.density_matrix_sigma);
        else if (k == "output.dump_fundamentals")
            c.echo[k] = c.output.dump_fundamentals ? "true" : "false";
    }
    return c;
}

/// Output-directory probe: partial computation must never be the first point
/// of failure for an unwritable destination.
inline void check_output_writable(const OutputOptions& out) {
    namespace fs = std::filesystem;
    const fs::path dir(out.dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path probe = dir / (out.prefix + ".writable_probe");
    std::ofstream f(probe);
    if (!f) throw ConfigError("output directory '" + out.dir + "' is not writable");
    f.close();
    fs::remove(probe, ec);
}

} // namespace pqosc
