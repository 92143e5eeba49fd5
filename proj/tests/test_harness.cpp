#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "etdrd/errors.hpp"
#include "etdrd/field.hpp"
#include "etdrd/harness.hpp"
#include "oracles.hpp"

using namespace etdrd;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("etdrd_" + tag + "_" + std::to_string(::getpid()))) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

Trajectory short_trajectory(int m, int N, int coarse, PadeFamily fam) {
    const auto spec = allen_cahn(2);
    const Grid g = unit_box_grid(2, m);
    const auto plan = make_plan(g, spec.T / N, spec.kappa, spec.q, scheme_by_family(fam),
                                BackendKind::Spectral);
    return integrate_scalar(spec, plan, N, coarse);
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

int run_cli(std::initializer_list<std::string> args) {
    std::vector<std::string> owned{"etdrd-bench"};
    owned.insert(owned.end(), args);
    std::vector<const char*> argv;
    for (const auto& a : owned) argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

} // namespace

TEST_CASE("trajectory snapshots land on the shared coarse times") {
    const auto traj = short_trajectory(8, 32, 4, PadeFamily::P02);
    REQUIRE(traj.times.size() == 5);
    REQUIRE(traj.fields.size() == 5);
    for (int k = 0; k <= 4; ++k)
        CHECK(traj.times[k] == doctest::Approx(0.25 * k).epsilon(1e-12));
    CHECK(traj.times[0] == 0.0);
}

TEST_CASE("step counts that miss the coarse times are rejected") {
    const auto spec = allen_cahn(2);
    const Grid g = unit_box_grid(2, 8);
    const auto plan = make_plan(g, spec.T / 30, spec.kappa, spec.q, scheme_p02(),
                                BackendKind::Spectral);
    CHECK_THROWS_AS((void)integrate_scalar(spec, plan, 30, 4), ConfigError);
}

TEST_CASE("error functional: zero on itself, exact on a point bump, strict on times") {
    const auto traj = short_trajectory(8, 16, 4, PadeFamily::P02);
    CHECK(compute_error_E(traj, traj) == 0.0);

    Trajectory bumped = traj;
    bumped.fields[2][5] += 3.5e-3;
    CHECK(compute_error_E(bumped, traj) == doctest::Approx(3.5e-3).epsilon(1e-12));

    // harmless representation jitter in the snapshot times is tolerated
    Trajectory jitter = traj;
    for (auto& t : jitter.times) t += 1e-12;
    CHECK(compute_error_E(jitter, traj) == 0.0);

    Trajectory wrong = traj;
    wrong.times[1] += 0.01;
    CHECK_THROWS_AS((void)compute_error_E(wrong, traj), ConfigError);

    Trajectory fewer = traj;
    fewer.times.pop_back();
    fewer.fields.pop_back();
    CHECK_THROWS_AS((void)compute_error_E(fewer, traj), ConfigError);
}

TEST_CASE("system error functional takes the worse of the two components") {
    SystemTrajectory a, b;
    const Grid g = unit_box_grid(2, 4);
    a.times = b.times = {0.0, 0.5};
    a.u = b.u = {Field::zeros(g), Field::zeros(g)};
    a.v = b.v = {Field::zeros(g), Field::zeros(g)};
    a.u[1][0] = 1e-4;
    a.v[1][0] = 7e-3;
    CHECK(compute_error_E(a, b) == doctest::Approx(7e-3).epsilon(1e-12));
}

TEST_CASE("convergence runner: row layout and step-halving EOC rule") {
    TempDir tmp("conv");
    RunConfig cfg;
    cfg.problem = "allen-cahn-2d";
    cfg.m = 32;
    cfg.coarse = 4;
    cfg.Ns = {16, 32, 48};
    cfg.out = tmp.path;
    cfg.quiet = true;
    const auto report = run_convergence(cfg);
    REQUIRE(report.rows.size() == 3);
    CHECK(report.problem == "allen-cahn-2d");
    CHECK(report.m == 32);
    CHECK_FALSE(report.rows[0].eoc.has_value());
    CHECK(report.rows[1].eoc.has_value());
    CHECK_FALSE(report.rows[2].eoc.has_value());  // 48 is not 2 x 32
    CHECK(report.rows[1].E < report.rows[0].E);
    for (const auto& row : report.rows) CHECK(row.cpu_seconds >= 0.0);
    // doubling the steps of a second-order method lands near EOC 2
    CHECK(*report.rows[1].eoc >= 1.5);
    CHECK(*report.rows[1].eoc <= 2.5);
    CHECK(fs::exists(tmp.path / "convergence_allen-cahn-2d_p02_spectral_m32.csv"));
    CHECK(fs::exists(tmp.path / "convergence_allen-cahn-2d_p02_spectral_m32.manifest.txt"));
}

TEST_CASE("convergence CSV round-trips through the parser") {
    TempDir tmp("csv");
    ConvergenceReport rep;
    rep.problem = "singular-source-2d";
    rep.scheme = "p04";
    rep.backend = "thomas";
    rep.platform = "test platform with spaces 1.2.3";
    rep.m = 48;
    rep.rows = {{16, 1.25e-2, std::nullopt, 0.75},
                {32, 3.1e-3, 2.0115, 1.5},
                {64, 7.7e-4, 2.009, 3.25}};
    const auto path = tmp.path / "roundtrip.csv";
    write_convergence_csv(rep, path);
    const auto back = parse_convergence_csv(path);
    CHECK(back.problem == rep.problem);
    CHECK(back.scheme == rep.scheme);
    CHECK(back.backend == rep.backend);
    CHECK(back.platform == rep.platform);
    CHECK(back.m == rep.m);
    REQUIRE(back.rows.size() == rep.rows.size());
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        CHECK(back.rows[i].N == rep.rows[i].N);
        CHECK(back.rows[i].E == doctest::Approx(rep.rows[i].E).epsilon(1e-15));
        CHECK(back.rows[i].eoc.has_value() == rep.rows[i].eoc.has_value());
        if (rep.rows[i].eoc)
            CHECK(*back.rows[i].eoc == doctest::Approx(*rep.rows[i].eoc).epsilon(1e-12));
        CHECK(back.rows[i].cpu_seconds ==
              doctest::Approx(rep.rows[i].cpu_seconds).epsilon(1e-15));
    }
}

TEST_CASE("reference trajectories are cached and invalidated by parameter changes") {
    TempDir tmp("cache");
    RunConfig cfg;
    cfg.problem = "singular-source-2d";
    cfg.m = 6;
    cfg.coarse = 4;
    cfg.T = 0.25;
    cfg.Ns = {8};
    cfg.out = tmp.path;
    cfg.quiet = true;

    const auto rep1 = run_convergence(cfg);
    const auto ref = tmp.path / "references" / "singular-source-2d_m6_N512_p02.traj";
    REQUIRE(fs::exists(ref));
    const std::string bytes1 = slurp(ref);

    const auto rep2 = run_convergence(cfg);  // second run must reuse the file
    CHECK(slurp(ref) == bytes1);
    CHECK(rep2.rows[0].E == rep1.rows[0].E);

    // weaker source, not stronger: a larger rho quenches from the 0.99 peak
    cfg.params.rho = 0.05;
    const auto rep3 = run_convergence(cfg);
    CHECK(slurp(ref) != bytes1);
    CHECK(rep3.rows[0].E != rep1.rows[0].E);
}

TEST_CASE("convergence runner rejects empty and non-multiple step counts") {
    RunConfig cfg;
    cfg.problem = "allen-cahn-2d";
    cfg.m = 8;
    cfg.coarse = 4;
    cfg.quiet = true;
    cfg.Ns = {};
    CHECK_THROWS_AS((void)run_convergence(cfg), ConfigError);
    cfg.Ns = {10};  // not a multiple of coarse=4
    CHECK_THROWS_AS((void)run_convergence(cfg), ConfigError);
}

TEST_CASE("timing table covers every backend variant at every size") {
    TempDir tmp("bench");
    RunConfig cfg;
    cfg.problem = "allen-cahn-2d";
    cfg.bench_ms = {6, 8};
    cfg.repeats = 1;
    cfg.out = tmp.path;
    cfg.quiet = true;
    const std::string csv = run_timing_scaling(cfg);
    CHECK(csv.rfind("m,backend,scheme,seconds,per_step_seconds\n", 0) == 0);
    // two sizes x two rational families x three 2D variants
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 12);
    CHECK(csv.find("nonslice") != std::string::npos);
    CHECK(fs::exists(tmp.path / "timing_allen-cahn-2d.csv"));
    CHECK(slurp(tmp.path / "timing_allen-cahn-2d.csv") == csv);

    RunConfig sys = cfg;
    sys.problem = "fhn-2d";
    CHECK_THROWS_AS((void)run_timing_scaling(sys), ConfigError);
}

TEST_CASE("oracle verification suite is green") {
    std::ostringstream sink;
    CHECK(verify_suite(sink) == 0);
    CHECK(sink.str().find("FAIL") == std::string::npos);
    CHECK(sink.str().find("ok") != std::string::npos);
}

TEST_CASE("cli: bad invocations exit with the usage code") {
    CHECK(run_cli({}) == 2);
    CHECK(run_cli({"frobnicate"}) == 2);
    CHECK(run_cli({"run", "--problem", "no-such-problem", "--N", "4", "--quiet"}) == 2);
    CHECK(run_cli({"run", "--problem", "allen-cahn-2d", "--m", "8", "--quiet"}) == 2);
    CHECK(run_cli({"run", "--problem", "allen-cahn-2d", "--m", "8", "--N", "4", "--tau",
                   "0.25", "--quiet"}) == 2);
}

TEST_CASE("cli: run writes the final field, snapshots and a manifest") {
    TempDir tmp("clirun");
    const int rc = run_cli({"run", "--problem", "allen-cahn-2d", "--m", "8", "--N", "8",
                            "--T", "0.5", "--snapshot-every", "4", "--quiet", "--out",
                            tmp.path.string()});
    CHECK(rc == 0);
    REQUIRE(fs::exists(tmp.path / "final_u.bin"));
    CHECK(fs::exists(tmp.path / "snap_u_000004.bin"));
    CHECK(fs::exists(tmp.path / "run_allen-cahn-2d.manifest.txt"));
    const auto [field, time] = load_field(tmp.path / "final_u.bin");
    CHECK(time == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(field.nx() == 7);
    CHECK(field.ny() == 7);
    // coarse in space and time, so only expect the e^{-T} decay ballpark
    CHECK(field.max_abs() == doctest::Approx(std::exp(-0.5)).epsilon(0.15));

    const std::string manifest = slurp(tmp.path / "run_allen-cahn-2d.manifest.txt");
    CHECK(manifest.find("problem=allen-cahn-2d") != std::string::npos);
    CHECK(manifest.find("range_max=") != std::string::npos);
}

TEST_CASE("cli: verify subcommand reports success") {
    CHECK(run_cli({"verify"}) == 0);
}

TEST_CASE("cli: config file supplies defaults, flags override it") {
    TempDir tmp("clicfg");
    const auto cfgfile = tmp.path / "settings.cfg";
    {
        std::ofstream os(cfgfile);
        os << "problem=allen-cahn-2d\n"
              "m=8\n"
              "T=0.5\n"
              "N=8\n"
              "quiet=true\n"
              "out=" << (tmp.path / "from_file").string() << "\n";
    }
    CHECK(run_cli({"run", "--config", cfgfile.string()}) == 0);
    CHECK(fs::exists(tmp.path / "from_file" / "final_u.bin"));

    // --out on the command line beats the file value
    CHECK(run_cli({"run", "--config", cfgfile.string(), "--out",
                   (tmp.path / "from_flag").string()}) == 0);
    CHECK(fs::exists(tmp.path / "from_flag" / "final_u.bin"));
}

TEST_CASE("cli: tau and N specifications agree") {
    TempDir tmp("clitau");
    const auto a = tmp.path / "by_n";
    const auto b = tmp.path / "by_tau";
    CHECK(run_cli({"run", "--problem", "allen-cahn-2d", "--m", "8", "--N", "16", "--T",
                   "0.5", "--quiet", "--out", a.string()}) == 0);
    CHECK(run_cli({"run", "--problem", "allen-cahn-2d", "--m", "8", "--tau", "0.03125",
                   "--T", "0.5", "--quiet", "--out", b.string()}) == 0);
    const auto [fa, ta] = load_field(a / "final_u.bin");
    const auto [fb, tb] = load_field(b / "final_u.bin");
    CHECK(ta == tb);
    CHECK(oracles::max_abs_diff(fa, fb) == 0.0);
}

TEST_CASE("field snapshot files round-trip and reject junk") {
    TempDir tmp("fieldio");
    const Grid g = unit_box_grid(2, 6);
    Field f = Field::zeros(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 0.01 * static_cast<double>(i) - 0.07;
    const auto p = tmp.path / "f.bin";
    save_field(f, 0.375, p);
    const auto [g2, t2] = load_field(p);
    CHECK(t2 == 0.375);
    CHECK(oracles::max_abs_diff(f, g2) == 0.0);

    std::ofstream(tmp.path / "junk.bin") << "not a field";
    CHECK_THROWS((void)load_field(tmp.path / "junk.bin"));

    Field bad = f;
    bad[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS((void)save_field(bad, 0.0, tmp.path / "bad.bin"));
}
