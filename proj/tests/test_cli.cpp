#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#ifndef PQOSC_CLI_PATH
#error "PQOSC_CLI_PATH must point at the built binary"
#endif

namespace fs = std::filesystem;

namespace {

struct Workspace {
    fs::path path;
    Workspace() {
        path = fs::temp_directory_path() /
               ("pqosc_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(rand()));
        fs::create_directories(path);
    }
    ~Workspace() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    fs::path file(const std::string& name, const std::string& content) const {
        const fs::path p = path / name;
        std::ofstream f(p);
        f << content;
        return p;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::size_t line_count(const std::string& text) {
    std::size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

/// Runs the binary with stdout/stderr captured; returns the exit code.
int run_cli(const Workspace& ws, const std::string& args, std::string* out = nullptr,
            std::string* err = nullptr) {
    const fs::path fo = ws.path / "stdout.txt";
    const fs::path fe = ws.path / "stderr.txt";
    const std::string cmd = std::string(PQOSC_CLI_PATH) + " " + args + " > " +
                            fo.string() + " 2> " + fe.string();
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    if (out) *out = slurp(fo);
    if (err) *err = slurp(fe);
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

std::string base_config(const fs::path& outdir, const std::string& extra = "") {
    std::ostringstream os;
    os << "system.omega0 = 1.0\n"
          "bath.beta = 1.0\n"
          "bath.gamma = 0.1\n"
          "bath.cutoff = 10.0\n"
          "grid.t_max = 5.0\n"
          "grid.n_steps = 500\n"
          "grid.snapshots = 10\n"
          "output.dir = "
       << outdir.string() << "\n"
       << extra;
    return os.str();
}

} // namespace

TEST_CASE("simulate writes moments, summary, and passes its built-in gates") {
    Workspace ws;
    const fs::path out = ws.path / "out";
    const fs::path cfg = ws.file("run.cfg", base_config(out));

    std::string stdout_text;
    REQUIRE(run_cli(ws, "simulate " + cfg.string(), &stdout_text) == 0);
    REQUIRE(stdout_text.find("wrote") != std::string::npos);

    const std::string moments = slurp(out / "run_moments.csv");
    REQUIRE(line_count(moments) == 12);   // header + equilibrium row + 10 snapshots
    REQUIRE(moments.rfind("t,", 0) == 0);

    const auto summary = nlohmann::json::parse(slurp(out / "run_summary.json"));
    REQUIRE(summary.at("command") == "simulate");
    REQUIRE(summary.at("config").at("bath.gamma") == "0.1");
    REQUIRE(summary.at("diagnostics").at("matsubaraTerms").get<long>() >= 64);
    for (const auto& check : summary.at("oracleChecks")) {
        INFO(check.at("name").get<std::string>());
        REQUIRE(check.at("passed").get<bool>());
    }
}

TEST_CASE("simulate is rerun-identical byte for byte") {
    Workspace ws;
    const fs::path out = ws.path / "out";
    const fs::path cfg = ws.file("run.cfg", base_config(out));

    REQUIRE(run_cli(ws, "simulate " + cfg.string() + " --dump-fundamentals") == 0);
    const std::string moments1 = slurp(out / "run_moments.csv");
    const std::string summary1 = slurp(out / "run_summary.json");
    const std::string fund1 = slurp(out / "run_fundamentals.csv");
    REQUIRE(fs::exists(out / "run_xfundamentals_1.csv"));
    REQUIRE(fs::exists(out / "run_xfundamentals_10.csv"));

    REQUIRE(run_cli(ws, "simulate " + cfg.string() + " --dump-fundamentals") == 0);
    REQUIRE(slurp(out / "run_moments.csv") == moments1);
    REQUIRE(slurp(out / "run_summary.json") == summary1);
    REQUIRE(slurp(out / "run_fundamentals.csv") == fund1);
}

TEST_CASE("simulate can sample the position-space density matrix") {
    Workspace ws;
    const fs::path out = ws.path / "out";
    const fs::path cfg = ws.file(
        "run.cfg", base_config(out, "output.density_matrix = true\n"
                                    "output.density_matrix_points = 12\n"));
    REQUIRE(run_cli(ws, "simulate " + cfg.string()) == 0);
    const auto summary = nlohmann::json::parse(slurp(out / "run_summary.json"));
    REQUIRE(summary.at("outputs").at("densityMatrices").size() == 11);
    const std::string d0 = slurp(out / "run_density_0.csv");
    REQUIRE(line_count(d0) == 25 * 25 + 1);   // (2*12+1)^2 grid rows + header
}

TEST_CASE("configuration errors exit 2 and name the offending key") {
    Workspace ws;
    const fs::path cfg = ws.file("bad.cfg",
                                 "system.omega0 = 1.0\n"
                                 "bath.beta = 1.0\n"
                                 "grid.t_max = 5.0\n"
                                 "grid.n_steps = 100\n");
    std::string err;
    REQUIRE(run_cli(ws, "simulate " + cfg.string(), nullptr, &err) == 2);
    REQUIRE(err.find("bath.gamma") != std::string::npos);

    // CLI-level misuse is also a configuration failure
    REQUIRE(run_cli(ws, "") == 2);
    REQUIRE(run_cli(ws, "simulate " + (ws.path / "absent.cfg").string()) == 2);
}

TEST_CASE("unphysical parameters exit 3") {
    Workspace ws;
    const fs::path out = ws.path / "out";
    const fs::path cfg = ws.file("neg.cfg", base_config(out, "system.mass = -1\n"));
    std::string err;
    REQUIRE(run_cli(ws, "simulate " + cfg.string(), nullptr, &err) == 3);
    REQUIRE(err.find("unphysical") != std::string::npos);
}

TEST_CASE("a grid too coarse for convergence exits 4 with advice") {
    Workspace ws;
    const fs::path out = ws.path / "out";
    const fs::path cfg = ws.file("coarse.cfg",
                                 "system.omega0 = 1.0\n"
                                 "bath.beta = 1.0\n"
                                 "bath.gamma = 0.1\n"
                                 "grid.t_max = 10.0\n"
                                 "grid.n_steps = 50\n"
                                 "output.dir = " +
                                     out.string() + "\n");
    std::string err;
    REQUIRE(run_cli(ws, "simulate " + cfg.string(), nullptr, &err) == 4);
    REQUIRE(err.find("n_steps") != std::string::npos);
}

TEST_CASE("kernels dumps the sampled kernel tables") {
    Workspace ws;
    const fs::path out = ws.path / "out";
    const fs::path cfg = ws.file("k.cfg", base_config(out));
    REQUIRE(run_cli(ws, "kernels " + cfg.string()) == 0);
    for (const char* leaf : {"run_damping_kernel.csv", "run_zeta_modes.csv",
                             "run_g_modes.csv", "run_f_modes.csv",
                             "run_noise_kernels.csv", "run_summary.json"})
        REQUIRE(fs::exists(out / leaf));
    const std::string zeta = slurp(out / "run_zeta_modes.csv");
    REQUIRE(zeta.rfind("s,value,n", 0) == 0);
    const auto summary = nlohmann::json::parse(slurp(out / "run_summary.json"));
    REQUIRE(summary.at("command") == "kernels");
    REQUIRE(summary.at("diagnostics").at("dampingLocalCoefficient").get<double>() >= 0.0);
}

TEST_CASE("equilibrium prints and writes the asymptotic covariances") {
    Workspace ws;
    const fs::path out = ws.path / "out";
    const fs::path cfg = ws.file("eq.cfg", base_config(out));
    std::string stdout_text;
    REQUIRE(run_cli(ws, "equilibrium " + cfg.string(), &stdout_text) == 0);
    REQUIRE(stdout_text.find("sigma_qq") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(out / "run_equilibrium.json"));
    REQUIRE(j.at("equilibrium").at("sigmaQQ").get<double>() > 0.0);
    REQUIRE(j.at("equilibrium").at("uncertaintyProduct").get<double>() >= 0.25 * (1 - 1e-9));
    REQUIRE(j.at("diagnostics").at("equilibriumIdentityResidual").get<double>() < 1e-6);
}

TEST_CASE("fast validate passes and reports as JSON") {
    Workspace ws;
    const fs::path jpath = ws.path / "report.json";
    std::string stdout_text;
    REQUIRE(run_cli(ws, "validate --json " + jpath.string(), &stdout_text) == 0);
    REQUIRE(stdout_text.find("all passed") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(jpath));
    REQUIRE(j.at("level") == "fast");
    REQUIRE(j.at("allPassed").get<bool>());
    REQUIRE(j.at("checks").size() >= 7);
}
