#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "etdrd/errors.hpp"
#include "etdrd/harness.hpp"

namespace etdrd {

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

PadeFamily parse_family(const std::string& s) {
    if (s == "p02") return PadeFamily::P02;
    if (s == "p04") return PadeFamily::P04;
    throw ConfigError("unknown scheme '" + s + "' (expected p02 or p04)");
}

std::string snap_name(const char* comp, long step) {
    std::ostringstream os;
    os << "snap_" << comp << "_" << std::setw(6) << std::setfill('0') << step << ".bin";
    return os.str();
}

int do_run(const RunConfig& cfg) {
    ProblemSpec spec = problem_by_name(cfg.problem, cfg.params);
    if (cfg.T > 0.0) spec.T = cfg.T;
    const int m = cfg.m > 0 ? cfg.m : spec.default_m;
    const Grid grid = unit_box_grid(spec.dim, m);

    int N = cfg.N;
    if (N > 0 && cfg.tau > 0.0)
        throw ConfigError("give either --N or --tau, not both");
    if (N <= 0) {
        if (cfg.tau <= 0.0) throw ConfigError("run needs --N or --tau");
        N = static_cast<int>(std::lround(spec.T / cfg.tau));
        if (N < 1 || std::abs(N * cfg.tau - spec.T) > 1e-9 * spec.T)
            throw ConfigError("tau must divide the final time T=" + std::to_string(spec.T));
    }
    const double tau = spec.T / N;
    const auto scheme = scheme_by_family(cfg.scheme);
    const auto cap =
        static_cast<std::size_t>(cfg.memory_cap_gb * double(std::size_t(1) << 30));
    std::filesystem::create_directories(cfg.out);

    double gmin = 0.0, gmax = 0.0;
    const double t0 = now_seconds();
    long steps = 0;
    auto track = [&](const Field& f) {
        for (std::size_t i = 0; i < f.size(); ++i) {
            gmin = std::min(gmin, f[i]);
            gmax = std::max(gmax, f[i]);
        }
    };

    if (spec.system) {
        const auto plan =
            make_system_plan(grid, tau, spec.kappa_u, spec.kappa_v, spec.q, scheme, cfg.backend);
        SystemState st{0, 0.0, spec.initial_u(grid), spec.initial_v(grid)};
        gmin = gmax = st.U[0];
        track(st.U);
        track(st.V);
        for (int n = 0; n < N; ++n) {
            st = etd2rkds_step_system(plan, st, spec.system_source);
            track(st.U);
            track(st.V);
            if (cfg.snapshot_every > 0 && st.n % cfg.snapshot_every == 0) {
                save_field(st.U, st.t, cfg.out / snap_name("u", st.n));
                save_field(st.V, st.t, cfg.out / snap_name("v", st.n));
            }
        }
        steps = st.n;
        save_field(st.U, st.t, cfg.out / "final_u.bin");
        save_field(st.V, st.t, cfg.out / "final_v.bin");
    } else {
        const auto plan = make_plan(grid, tau, spec.kappa, spec.q, scheme, cfg.backend, cap);
        StepperState st{0, 0.0, spec.initial_u(grid)};
        gmin = gmax = st.U[0];
        track(st.U);
        for (int n = 0; n < N; ++n) {
            st = advance(plan, st, spec.source);
            track(st.U);
            if (cfg.snapshot_every > 0 && st.n % cfg.snapshot_every == 0)
                save_field(st.U, st.t, cfg.out / snap_name("u", st.n));
        }
        steps = st.n;
        save_field(st.U, st.t, cfg.out / "final_u.bin");
    }
    const double wall = now_seconds() - t0;

    std::ostringstream sum;
    sum << "problem=" << spec.name << " m=" << m << " scheme=" << family_name(cfg.scheme)
        << " backend=" << backend_name(cfg.backend) << "\n"
        << "steps=" << steps << " tau=" << tau << " T=" << spec.T << "\n"
        << std::setprecision(10) << "range_min=" << gmin << " range_max=" << gmax << "\n"
        << std::setprecision(6) << "wall_seconds=" << wall << "\n";
    if (!cfg.quiet) std::cout << sum.str();
    std::ofstream(cfg.out / ("run_" + spec.name + ".manifest.txt")) << sum.str();
    return 0;
}

int do_converge(const RunConfig& cfg) {
    const ConvergenceReport rep = run_convergence(cfg);
    std::cout << "# " << rep.problem << " " << rep.scheme << " " << rep.backend
              << " m=" << rep.m << "\n";
    std::cout << std::setw(8) << "N" << std::setw(14) << "E" << std::setw(10) << "EOC"
              << std::setw(14) << "cpu_seconds" << "\n";
    for (const auto& row : rep.rows) {
        std::cout << std::setw(8) << row.N << std::setw(14) << std::scientific
                  << std::setprecision(3) << row.E;
        if (row.eoc)
            std::cout << std::setw(10) << std::fixed << std::setprecision(2) << *row.eoc;
        else
            std::cout << std::setw(10) << "";
        std::cout << std::setw(14) << std::fixed << std::setprecision(3)
                  << row.cpu_seconds << "\n";
    }
    return 0;
}

} // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"dimension-split exponential integrator benchmark for "
                 "reaction-diffusion problems"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string scheme = "p02", backend = "spectral", out = "out";
    std::vector<std::string> names;
    for (const auto& n : problem_names()) names.push_back(n);

    app.add_option("--problem", cfg.problem, "problem name")
        ->check(CLI::IsMember(names));
    app.add_option("--m", cfg.m, "spatial subintervals per axis (0 = problem default)");
    app.add_option("--scheme", scheme, "rational approximation family")
        ->check(CLI::IsMember({"p02", "p04"}));
    app.add_option("--backend", backend, "directional solve backend")
        ->check(CLI::IsMember({"spectral", "thomas", "nonsplit", "reference"}));
    app.add_option("--T", cfg.T, "final time (0 = problem default)");
    app.add_option("--out", out, "output directory");
    app.add_option("--coarse", cfg.coarse, "coarse snapshot count (0 = problem default)");
    app.add_option("--N", cfg.N, "run: number of time steps");
    app.add_option("--tau", cfg.tau, "run/bench: time step size");
    app.add_option("--Ns", cfg.Ns, "converge: comma-separated step counts")
        ->delimiter(',');
    app.add_option("--ms", cfg.bench_ms, "bench: comma-separated grid sizes")
        ->delimiter(',');
    app.add_option("--repeats", cfg.repeats, "bench: timing repeats (median kept)");
    app.add_option("--nonslice-max", cfg.bench_nonslice_max,
                   "bench: largest m for the non-sliced banded variant");
    app.add_option("--memory-cap-gb", cfg.memory_cap_gb,
                   "banded-factorization memory guard");
    app.add_option("--snapshot-every", cfg.snapshot_every,
                   "run: write a field snapshot every k steps");
    app.add_flag("--quiet", cfg.quiet, "suppress progress chatter");

    app.add_option("--lambda", cfg.params.lambda, "manufactured decay rate");
    app.add_option("--rho", cfg.params.rho, "singular-source strength");
    app.add_option("--kappa", cfg.params.kappa, "diffusivity");
    app.add_option("--sigma", cfg.params.sigma, "activator bump width");
    app.add_option("--alpha", cfg.params.alpha, "inhibitor relaxation coefficient");
    app.add_option("--eps", cfg.params.eps, "inhibitor time-scale separation");
    app.add_option("--kappa-u", cfg.params.kappa_u, "activator diffusivity");
    app.add_option("--kappa-v", cfg.params.kappa_v, "inhibitor diffusivity");

    app.set_config("--config", "", "flat key=value configuration file");

    auto* run_sc = app.add_subcommand("run", "integrate once and write snapshots");
    auto* conv_sc = app.add_subcommand("converge", "error-vs-N study against a reference");
    auto* bench_sc = app.add_subcommand("bench", "timing table over grid sizes");
    auto* verify_sc = app.add_subcommand("verify", "run the internal oracle suite");
    for (auto* sc : {run_sc, conv_sc, bench_sc, verify_sc}) sc->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        cfg.scheme = parse_family(scheme);
        cfg.backend = backend_by_name(backend);
        cfg.out = out;
        if (run_sc->parsed()) return do_run(cfg);
        if (conv_sc->parsed()) return do_converge(cfg);
        if (bench_sc->parsed()) {
            if (!app.count("--problem")) cfg.problem = "singular-source-2d";
            std::cout << run_timing_scaling(cfg);
            return 0;
        }
        if (verify_sc->parsed()) return verify_suite(std::cout) == 0 ? 0 : 1;
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const MemoryGuardError& e) {
        std::cerr << "memory guard: " << e.what() << "\n";
        return 1;
    } catch (const StepperAbort& e) {
        std::cerr << "integration aborted at t=" << e.t << " step " << e.step << ": "
                  << e.what() << "\n";
        return 1;
    } catch (const NumericsError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 1;
    }
}

} // namespace etdrd
