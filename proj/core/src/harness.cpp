#include "etdrd/harness.hpp"

#include <sys/utsname.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "json.hpp"

#include "etdrd/errors.hpp"

namespace etdrd {

namespace {

using json = nlohmann::json;

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string platform_string() {
    utsname u{};
    if (uname(&u) != 0) return "unknown";
    return std::string(u.sysname) + " " + u.release + " " + u.machine;
}

int find_time(const std::vector<double>& times, double t) {
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    for (std::size_t j = 0; j < times.size(); ++j)
        if (std::abs(times[j] - t) <= tol) return static_cast<int>(j);
    return -1;
}

double sup_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// ---- trajectory cache file -------------------------------------------------
// "ETRJ" v1: dim, shape, component count, snapshot count, a JSON fingerprint
// of the generating configuration, then (time, fields...) records.  A stale
// fingerprint invalidates the cache even though the key matches.
constexpr char kTrajMagic[4] = {'E', 'T', 'R', 'J'};

void write_traj_file(const std::filesystem::path& path, const json& fingerprint,
                     const std::vector<double>& times,
                     const std::vector<const std::vector<Field>*>& comps) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write " + path.string());
    os.write(kTrajMagic, 4);
    auto put_u32 = [&](std::uint32_t v) { os.write(reinterpret_cast<char*>(&v), 4); };
    put_u32(1);
    const Field& f0 = (*comps[0])[0];
    put_u32(static_cast<std::uint32_t>(f0.dim()));
    for (int a = 0; a < 3; ++a) put_u32(static_cast<std::uint32_t>(f0.shape()[a]));
    put_u32(static_cast<std::uint32_t>(comps.size()));
    put_u32(static_cast<std::uint32_t>(times.size()));
    const std::string fp = fingerprint.dump();
    put_u32(static_cast<std::uint32_t>(fp.size()));
    os.write(fp.data(), static_cast<std::streamsize>(fp.size()));
    for (std::size_t k = 0; k < times.size(); ++k) {
        os.write(reinterpret_cast<const char*>(&times[k]), 8);
        for (const auto* c : comps)
            os.write(reinterpret_cast<const char*>((*c)[k].data()),
                     static_cast<std::streamsize>((*c)[k].size() * 8));
    }
    if (!os) throw ConfigError("short write to " + path.string());
}

// returns false on any mismatch (missing file, wrong fingerprint, corruption)
bool read_traj_file(const std::filesystem::path& path, const json& fingerprint,
                    int dim, std::array<int, 3> shape, int ncomp,
                    std::vector<double>& times, std::vector<std::vector<Field>*> comps) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return false;
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kTrajMagic, 4) != 0) return false;
    auto get_u32 = [&]() {
        std::uint32_t v = 0;
        is.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    if (get_u32() != 1) return false;
    if (static_cast<int>(get_u32()) != dim) return false;
    for (int a = 0; a < 3; ++a)
        if (static_cast<int>(get_u32()) != shape[a]) return false;
    if (static_cast<int>(get_u32()) != ncomp) return false;
    const std::uint32_t count = get_u32();
    const std::uint32_t fplen = get_u32();
    std::string fp(fplen, '\0');
    is.read(fp.data(), fplen);
    if (!is || json::parse(fp, nullptr, false) != fingerprint) return false;

    times.assign(count, 0.0);
    for (auto* c : comps) c->assign(count, Field(dim, shape));
    for (std::uint32_t k = 0; k < count; ++k) {
        is.read(reinterpret_cast<char*>(&times[k]), 8);
        for (auto* c : comps)
            is.read(reinterpret_cast<char*>((*c)[k].data()),
                    static_cast<std::streamsize>((*c)[k].size() * 8));
    }
    return static_cast<bool>(is);
}

struct ResolvedConfig {
    ProblemSpec spec;
    Grid grid;
    int m = 0;
    int coarse = 0;
    RationalScheme scheme;
};

ResolvedConfig resolve(const RunConfig& cfg) {
    ResolvedConfig r{problem_by_name(cfg.problem, cfg.params), Grid{}, 0, 0,
                     scheme_by_family(cfg.scheme)};
    if (cfg.T > 0.0) r.spec.T = cfg.T;
    r.m = cfg.m > 0 ? cfg.m : r.spec.default_m;
    r.coarse = cfg.coarse > 0 ? cfg.coarse : r.spec.coarse;
    r.grid = unit_box_grid(r.spec.dim, r.m);
    return r;
}

json param_fingerprint(const RunConfig& cfg, const ResolvedConfig& rc) {
    const auto& p = cfg.params;
    return json{{"problem", rc.spec.name},
                {"T", rc.spec.T},
                {"coarse", rc.coarse},
                {"backend", backend_name(cfg.backend)},
                {"lambda", p.lambda},
                {"rho", p.rho},
                {"kappa", p.kappa},
                {"sigma", p.sigma},
                {"alpha", p.alpha},
                {"eps", p.eps},
                {"kappa_u", p.kappa_u},
                {"kappa_v", p.kappa_v}};
}

std::size_t cap_bytes(const RunConfig& cfg) {
    return static_cast<std::size_t>(cfg.memory_cap_gb * double(std::size_t(1) << 30));
}

} // namespace

Trajectory integrate_scalar(const ProblemSpec& spec, const StepperPlan& plan, int N,
                            int coarse) {
    if (N <= 0 || coarse <= 0 || N % coarse != 0)
        throw ConfigError("step count must be a positive multiple of the coarse count (" +
                          std::to_string(N) + " vs " + std::to_string(coarse) + ")");
    const int stride = N / coarse;
    StepperState st{0, 0.0, spec.initial_u(plan.grid)};
    Trajectory traj;
    traj.times.reserve(coarse + 1);
    traj.times.push_back(0.0);
    traj.fields.push_back(st.U);
    for (int n = 0; n < N; ++n) {
        st = advance(plan, st, spec.source);
        if ((n + 1) % stride == 0) {
            traj.times.push_back(st.t);
            traj.fields.push_back(st.U);
        }
    }
    return traj;
}

SystemTrajectory integrate_system(const ProblemSpec& spec, const SystemPlan& plan, int N,
                                  int coarse) {
    if (N <= 0 || coarse <= 0 || N % coarse != 0)
        throw ConfigError("step count must be a positive multiple of the coarse count");
    const int stride = N / coarse;
    SystemState st{0, 0.0, spec.initial_u(plan.grid), spec.initial_v(plan.grid)};
    SystemTrajectory traj;
    traj.times.push_back(0.0);
    traj.u.push_back(st.U);
    traj.v.push_back(st.V);
    for (int n = 0; n < N; ++n) {
        st = etd2rkds_step_system(plan, st, spec.system_source);
        if ((n + 1) % stride == 0) {
            traj.times.push_back(st.t);
            traj.u.push_back(st.U);
            traj.v.push_back(st.V);
        }
    }
    return traj;
}

double compute_error_E(const Trajectory& traj, const Trajectory& truth) {
    if (traj.times.size() != truth.times.size())
        throw ConfigError("trajectory snapshot counts differ: " +
                          std::to_string(traj.times.size()) + " vs " +
                          std::to_string(truth.times.size()));
    double E = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const int j = find_time(truth.times, traj.times[i]);
        if (j < 0)
            throw ConfigError("no matching truth snapshot at t=" +
                              std::to_string(traj.times[i]));
        if (!traj.fields[i].same_shape(truth.fields[j]))
            throw ConfigError("snapshot shape mismatch against truth");
        E = std::max(E, sup_diff(traj.fields[i], truth.fields[j]));
    }
    return E;
}

double compute_error_E(const SystemTrajectory& traj, const SystemTrajectory& truth) {
    if (traj.times.size() != truth.times.size())
        throw ConfigError("trajectory snapshot counts differ: " +
                          std::to_string(traj.times.size()) + " vs " +
                          std::to_string(truth.times.size()));
    double E = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const int j = find_time(truth.times, traj.times[i]);
        if (j < 0)
            throw ConfigError("no matching truth snapshot at t=" +
                              std::to_string(traj.times[i]));
        E = std::max(E, sup_diff(traj.u[i], truth.u[j]));
        E = std::max(E, sup_diff(traj.v[i], truth.v[j]));
    }
    return E;
}

namespace {

Trajectory exact_trajectory(const ProblemSpec& spec, const Grid& grid, int coarse) {
    Trajectory t;
    for (int k = 0; k <= coarse; ++k) {
        const double tk = spec.T * k / coarse;
        t.times.push_back(tk);
        t.fields.push_back(spec.exact_field(grid, tk));
    }
    return t;
}

std::filesystem::path reference_path(const RunConfig& cfg, const ResolvedConfig& rc) {
    return cfg.out / "references" /
           (rc.spec.name + "_m" + std::to_string(rc.m) + "_N" +
            std::to_string(rc.spec.reference_N) + "_" + family_name(cfg.scheme) + ".traj");
}

Trajectory scalar_truth(const RunConfig& cfg, const ResolvedConfig& rc) {
    if (rc.spec.has_exact) return exact_trajectory(rc.spec, rc.grid, rc.coarse);
    if (rc.spec.reference_N <= 0)
        throw ConfigError(rc.spec.name + " has neither exact solution nor reference N");
    const auto path = reference_path(cfg, rc);
    const auto fp = param_fingerprint(cfg, rc);
    Trajectory ref;
    if (read_traj_file(path, fp, rc.spec.dim, rc.grid.interior_shape(), 1, ref.times,
                       {&ref.fields}))
        return ref;
    const double tau = rc.spec.T / rc.spec.reference_N;
    const auto plan = make_plan(rc.grid, tau, rc.spec.kappa, rc.spec.q, rc.scheme,
                                cfg.backend, cap_bytes(cfg));
    ref = integrate_scalar(rc.spec, plan, rc.spec.reference_N, rc.coarse);
    write_traj_file(path, fp, ref.times, {&ref.fields});
    return ref;
}

SystemTrajectory system_truth(const RunConfig& cfg, const ResolvedConfig& rc) {
    const auto path = reference_path(cfg, rc);
    const auto fp = param_fingerprint(cfg, rc);
    SystemTrajectory ref;
    if (read_traj_file(path, fp, rc.spec.dim, rc.grid.interior_shape(), 2, ref.times,
                       {&ref.u, &ref.v}))
        return ref;
    const double tau = rc.spec.T / rc.spec.reference_N;
    const auto plan = make_system_plan(rc.grid, tau, rc.spec.kappa_u, rc.spec.kappa_v,
                                       rc.spec.q, rc.scheme, cfg.backend);
    ref = integrate_system(rc.spec, plan, rc.spec.reference_N, rc.coarse);
    write_traj_file(path, fp, ref.times, {&ref.u, &ref.v});
    return ref;
}

void write_manifest(const std::filesystem::path& path, const RunConfig& cfg,
                    const ResolvedConfig& rc, const std::string& extra) {
    std::ofstream os(path, std::ios::trunc);
    os << "problem=" << rc.spec.name << "\n"
       << "m=" << rc.m << "\n"
       << "scheme=" << family_name(cfg.scheme) << "\n"
       << "backend=" << backend_name(cfg.backend) << "\n"
       << "T=" << rc.spec.T << "\n"
       << "coarse=" << rc.coarse << "\n"
       << "platform=" << platform_string() << "\n";
    const auto& p = cfg.params;
    os << "lambda=" << p.lambda << "\nrho=" << p.rho << "\nkappa=" << p.kappa
       << "\nsigma=" << p.sigma << "\nalpha=" << p.alpha << "\neps=" << p.eps
       << "\nkappa_u=" << p.kappa_u << "\nkappa_v=" << p.kappa_v << "\n";
    if (rc.spec.reference_N > 0) os << "reference_N=" << rc.spec.reference_N << "\n";
    os << extra;
}

} // namespace

ConvergenceReport run_convergence(const RunConfig& cfg) {
    const ResolvedConfig rc = resolve(cfg);
    if (cfg.Ns.empty()) throw ConfigError("convergence study needs a nonempty N list");
    for (int N : cfg.Ns)
        if (N <= 0 || N % rc.coarse != 0)
            throw ConfigError("every N must be a positive multiple of " +
                              std::to_string(rc.coarse) + "; got " + std::to_string(N));

    ConvergenceReport report;
    report.problem = rc.spec.name;
    report.scheme = family_name(cfg.scheme);
    report.backend = backend_name(cfg.backend);
    report.platform = platform_string();
    report.m = rc.m;

    Trajectory truth_s;
    SystemTrajectory truth_v;
    if (rc.spec.system)
        truth_v = system_truth(cfg, rc);
    else
        truth_s = scalar_truth(cfg, rc);

    for (std::size_t r = 0; r < cfg.Ns.size(); ++r) {
        const int N = cfg.Ns[r];
        const double tau = rc.spec.T / N;
        const double t0 = now_seconds();
        double E = 0.0;
        try {
            if (rc.spec.system) {
                const auto plan = make_system_plan(rc.grid, tau, rc.spec.kappa_u,
                                                   rc.spec.kappa_v, rc.spec.q, rc.scheme,
                                                   cfg.backend);
                E = compute_error_E(integrate_system(rc.spec, plan, N, rc.coarse), truth_v);
            } else {
                const auto plan = make_plan(rc.grid, tau, rc.spec.kappa, rc.spec.q,
                                            rc.scheme, cfg.backend, cap_bytes(cfg));
                E = compute_error_E(integrate_scalar(rc.spec, plan, N, rc.coarse), truth_s);
            }
        } catch (const StepperAbort& e) {
            throw StepperAbort(std::string(e.what()) + " [N=" + std::to_string(N) + "]",
                               e.t, e.step);
        }
        ConvergenceRow row;
        row.N = N;
        row.E = E;
        row.cpu_seconds = now_seconds() - t0;
        if (r > 0 && N == 2 * cfg.Ns[r - 1] && E > 0.0)
            row.eoc = std::log2(report.rows.back().E / E);
        report.rows.push_back(row);
    }

    std::filesystem::create_directories(cfg.out);
    const std::string base = "convergence_" + report.problem + "_" + report.scheme + "_" +
                             report.backend + "_m" + std::to_string(report.m);
    write_convergence_csv(report, cfg.out / (base + ".csv"));
    write_manifest(cfg.out / (base + ".manifest.txt"), cfg, rc, "");
    return report;
}

void write_convergence_csv(const ConvergenceReport& report,
                           const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw ConfigError("cannot write " + path.string());
    os << "# problem=" << report.problem << " scheme=" << report.scheme
       << " backend=" << report.backend << " m=" << report.m
       << " platform=" << report.platform << "\n";
    os << "N,E,EOC,cpu_seconds\n";
    os << std::setprecision(17);
    for (const auto& row : report.rows) {
        os << row.N << "," << row.E << ",";
        if (row.eoc) os << *row.eoc;
        os << "," << row.cpu_seconds << "\n";
    }
}

ConvergenceReport parse_convergence_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read " + path.string());
    ConvergenceReport report;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string tok;
            while (ss >> tok) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
                if (key == "problem") report.problem = val;
                else if (key == "scheme") report.scheme = val;
                else if (key == "backend") report.backend = val;
                else if (key == "m") report.m = std::stoi(val);
                else if (key == "platform") {
                    std::string rest;
                    std::getline(ss, rest);
                    report.platform = val + rest;
                }
            }
            continue;
        }
        if (line.rfind("N,", 0) == 0) continue;
        std::istringstream ss(line);
        std::string tok;
        ConvergenceRow row;
        std::getline(ss, tok, ',');
        row.N = std::stoi(tok);
        std::getline(ss, tok, ',');
        row.E = std::stod(tok);
        std::getline(ss, tok, ',');
        if (!tok.empty()) row.eoc = std::stod(tok);
        std::getline(ss, tok, ',');
        row.cpu_seconds = std::stod(tok);
        report.rows.push_back(row);
    }
    return report;
}

// ---- verification suite -----------------------------------------------------

namespace {

Field random_field(const Grid& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Field f = Field::zeros(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = dist(rng);
    return f;
}

struct Check {
    std::string name;
    bool ok;
    std::string detail;
};

Check check_slice_equivalence(int dim) {
    const Grid g = unit_box_grid(dim, 4);  // 3 interior points per axis
    const Field f = random_field(g, 1234 + dim);
    double worst = 0.0;
    for (PadeFamily fam : {PadeFamily::P02, PadeFamily::P04}) {
        const auto scheme = scheme_by_family(fam);
        for (int ell = 1; ell <= 3; ++ell) {
            const auto rep = slice_equivalence_oracle(g, 0.05, scheme, ell, f);
            worst = std::max(worst, rep.max_abs_deviation);
        }
    }
    std::ostringstream os;
    os << "max deviation " << std::scientific << std::setprecision(2) << worst;
    return {"slice equivalence " + std::to_string(dim) + "D", worst <= 1e-12, os.str()};
}

Check check_backend_agreement() {
    std::array<std::pair<double, double>, 2> b{{{0.0, 1.0}, {0.0, 1.0}}};
    std::array<int, 2> ms{8, 6};  // 7x5 interior
    const Grid g = build_grid(2, b, ms);
    const Field f = random_field(g, 99);
    double worst = 0.0;
    for (PadeFamily fam : {PadeFamily::P02, PadeFamily::P04}) {
        const auto scheme = scheme_by_family(fam);
        for (int a = 0; a < 2; ++a) {
            const Axis axis = static_cast<Axis>(a);
            const auto op = build_operator(g, axis, 1.0, 1.0);
            auto factor = std::make_shared<const SpectralFactor>(spectral_factor(op));
            const auto spec = build_spectral_payload(factor, 0.02, scheme);
            const auto thom = build_thomas_payload(op, 0.02, scheme);
            for (int ell = 1; ell <= 3; ++ell) {
                const Field a1 = apply_Q_spectral(spec, ell, 0.02, f, axis);
                const Field a2 = apply_Q_thomas(thom, ell, 0.02, f, axis);
                double num = 0.0, den = 0.0;
                for (std::size_t i = 0; i < a1.size(); ++i) {
                    num = std::max(num, std::abs(a1[i] - a2[i]));
                    den = std::max(den, std::abs(a1[i]));
                }
                worst = std::max(worst, num / std::max(den, 1e-300));
            }
        }
    }
    std::ostringstream os;
    os << "max relative gap " << std::scientific << std::setprecision(2) << worst;
    return {"spectral/thomas agreement", worst <= 1e-10, os.str()};
}

// PDE residual of the manufactured solution at scattered points, with
// Richardson-extrapolated central differences in time and space.
Check check_manufactured_residual(int dim) {
    const ProblemParams params;
    const ProblemSpec spec = allen_cahn(dim, params);
    std::mt19937 rng(7 * dim);
    std::uniform_real_distribution<double> pos(0.2, 0.8), time_d(0.05, 0.95);

    auto exact_at = [&](std::array<double, 3> x, double t) {
        return spec.exact(x[0], x[1], x[2], t);
    };
    // evaluate the source closure at one point by building a grid whose only
    // interior node is that point
    auto source_at = [&](std::array<double, 3> x, double t, double u) {
        const double d = 1e-3;
        std::array<std::pair<double, double>, 3> b;
        std::array<int, 3> ms{2, 2, 2};
        for (int a = 0; a < dim; ++a) b[a] = {x[a] - d, x[a] + d};
        const Grid g = build_grid(dim, std::span(b).first(dim), std::span(ms).first(dim));
        Field f(dim, g.interior_shape());
        f[0] = u;
        return spec.source(t, f, g)[0];
    };

    auto richardson2 = [](auto f, double h) {  // second derivative, O(h^4)
        const double c = f(0.0);
        const double d1 = (f(h) - 2 * c + f(-h)) / (h * h);
        const double d2 = (f(h / 2) - 2 * c + f(-h / 2)) / (h * h / 4);
        return (4.0 * d2 - d1) / 3.0;
    };
    auto richardson1 = [](auto f, double h) {  // first derivative, O(h^4)
        const double d1 = (f(h) - f(-h)) / (2 * h);
        const double d2 = (f(h / 2) - f(-h / 2)) / h;
        return (4.0 * d2 - d1) / 3.0;
    };

    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        std::array<double, 3> x{pos(rng), pos(rng), dim == 3 ? pos(rng) : 0.0};
        const double t = time_d(rng);
        const double ut =
            richardson1([&](double dt) { return exact_at(x, t + dt); }, 1e-2);
        double lap = 0.0;
        for (int a = 0; a < dim; ++a)
            lap += richardson2(
                [&](double dx) {
                    auto xx = x;
                    xx[a] += dx;
                    return exact_at(xx, t);
                },
                5e-3);
        const double u = exact_at(x, t);
        const double res = ut - spec.kappa * lap + spec.q * u - source_at(x, t, u);
        worst = std::max(worst, std::abs(res));
    }
    std::ostringstream os;
    os << "max |residual| " << std::scientific << std::setprecision(2) << worst;
    return {"manufactured-solution residual " + std::to_string(dim) + "D", worst <= 1e-8,
            os.str()};
}

Check check_scalar_weights() {
    double worst = 0.0;
    for (PadeFamily fam : {PadeFamily::P02, PadeFamily::P04}) {
        const auto scheme = scheme_by_family(fam);
        // construction already cross-validates; re-assert the limits here
        worst = std::max(worst, std::abs(eval_scalar(scheme, 1, 0.0) - 1.0));
        worst = std::max(worst, std::abs(eval_scalar(scheme, 2, 0.0) - 1.0));
        worst = std::max(worst, std::abs(eval_scalar(scheme, 3, 0.0) - 0.5));
    }
    std::ostringstream os;
    os << "max deviation at 0: " << std::scientific << std::setprecision(2) << worst;
    return {"rational weight limits", worst <= 1e-12, os.str()};
}

} // namespace

int verify_suite(std::ostream& os) {
    std::vector<Check> checks;
    checks.push_back(check_scalar_weights());
    checks.push_back(check_slice_equivalence(2));
    checks.push_back(check_slice_equivalence(3));
    checks.push_back(check_backend_agreement());
    checks.push_back(check_manufactured_residual(2));
    checks.push_back(check_manufactured_residual(3));

    int failures = 0;
    for (const auto& c : checks) {
        os << (c.ok ? "ok   " : "FAIL ") << c.name << " (" << c.detail << ")\n";
        if (!c.ok) ++failures;
    }
    return failures;
}

} // namespace etdrd
