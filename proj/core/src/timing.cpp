#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "etdrd/banded.hpp"
#include "etdrd/errors.hpp"
#include "etdrd/harness.hpp"

namespace etdrd {

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// ---- non-sliced banded variant ----------------------------------------------
// Realizes the same directional solves as the Thomas backend, but each
// (tau*A_axis - s*I) is factored over the full 2D unknown vector as one
// complex-symmetric banded matrix (bandwidth 1 along x, n_x along y) instead
// of being sliced into independent pencils.
struct NonSliceAxisPayload {
    int n = 0;
    std::vector<BandedLDLT> pole_factors;  // one per retained pole
    std::vector<std::complex<double>> poles;
    std::array<std::vector<std::complex<double>>, 3> residues;
    std::size_t bytes = 0;
};

NonSliceAxisPayload build_nonslice_payload(const Grid& grid, Axis axis, double tau,
                                           double kappa, double q,
                                           const RationalScheme& scheme,
                                           std::size_t cap_bytes) {
    if (grid.dim != 2) throw ConfigError("non-sliced variant is two-dimensional only");
    const auto op = build_operator(grid, axis, kappa, q);
    const int nx = grid.interior(Axis::X);
    const int ny = grid.interior(Axis::Y);
    const int n = nx * ny;
    const int bw = axis == Axis::X ? 1 : nx;

    NonSliceAxisPayload pl;
    pl.n = n;
    for (const auto& term : scheme.terms[0]) pl.poles.push_back(term.pole);
    for (int ell = 1; ell <= 3; ++ell)
        for (const auto& term : scheme.for_ell(ell)) pl.residues[ell - 1].push_back(term.residue);

    const std::size_t need = pl.poles.size() * banded_storage_bytes(n, bw);
    if (cap_bytes > 0 && need > cap_bytes)
        throw MemoryGuardError("non-sliced banded factorization needs " +
                               std::to_string(need >> 20) + " MiB, above the cap");
    pl.bytes = need;

    for (const auto& s : pl.poles) {
        BandedLDLT f(n, bw);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int row = i + nx * j;
                f.band(0, row) = tau * op.diag - s;
                if (axis == Axis::X) {
                    if (i + 1 < nx) f.band(1, row) = tau * op.off;
                } else {
                    if (j + 1 < ny) f.band(bw, row) = tau * op.off;
                }
            }
        f.factor();
        pl.pole_factors.push_back(std::move(f));
    }
    return pl;
}

Field apply_Q_nonslice(const NonSliceAxisPayload& pl, int ell, const Field& f) {
    if (static_cast<int>(f.size()) != pl.n)
        throw ConfigError("field size does not match non-sliced factorization");
    Field out(f.dim(), f.shape());
    std::vector<std::complex<double>> w(f.size());
    for (std::size_t p = 0; p < pl.pole_factors.size(); ++p) {
        for (std::size_t i = 0; i < f.size(); ++i) w[i] = f[i];
        pl.pole_factors[p].solve(w.data());
        const std::complex<double> r = pl.residues[ell - 1][p];
        for (std::size_t i = 0; i < f.size(); ++i) out[i] += 2.0 * std::real(r * w[i]);
    }
    return out;
}

struct NonSlicePlan {
    Grid grid;
    double tau = 0.0;
    NonSliceAxisPayload qx, qy;
};

NonSlicePlan make_nonslice_plan(const Grid& grid, double tau, double kappa, double q,
                                const RationalScheme& scheme, std::size_t cap_bytes) {
    NonSlicePlan plan;
    plan.grid = grid;
    plan.tau = tau;
    plan.qx = build_nonslice_payload(grid, Axis::X, tau, kappa, q, scheme, cap_bytes);
    plan.qy = build_nonslice_payload(grid, Axis::Y, tau, kappa, q, scheme, cap_bytes);
    return plan;
}

StepperState nonslice_step(const NonSlicePlan& plan, const StepperState& state,
                           const SourceFunction& source) {
    const double tau = plan.tau;
    const Field fn = source.fn(state.t, state.U, plan.grid);
    const Field w1 = apply_Q_nonslice(plan.qy, 1, state.U);
    const Field w2 = apply_Q_nonslice(plan.qy, 1, fn);

    Field what = apply_Q_nonslice(plan.qx, 1, w1);
    {
        const Field tmp = apply_Q_nonslice(plan.qx, 2, w2);
        for (std::size_t i = 0; i < what.size(); ++i) what[i] += tau * tmp[i];
    }
    Field fw = source.fn(state.t + tau, what, plan.grid);
    for (std::size_t i = 0; i < fw.size(); ++i) fw[i] -= w2[i];
    Field u1 = what;
    {
        const Field tmp = apply_Q_nonslice(plan.qx, 3, fw);
        for (std::size_t i = 0; i < u1.size(); ++i) u1[i] += tau * tmp[i];
    }
    if (!u1.all_finite())
        throw StepperAbort("non-finite field after step", state.t + tau, state.n + 1);
    return {state.n + 1, (state.n + 1) * tau, std::move(u1)};
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

} // namespace

std::string run_timing_scaling(const RunConfig& cfg) {
    ProblemSpec spec = problem_by_name(cfg.problem, cfg.params);
    if (spec.system)
        throw ConfigError("the timing table covers scalar problems only");
    if (cfg.T > 0.0) spec.T = cfg.T;
    const double tau = cfg.tau > 0.0 ? cfg.tau : 1.0 / 32.0;
    const int N = static_cast<int>(std::lround(spec.T / tau));
    if (N < 1 || std::abs(N * tau - spec.T) > 1e-9 * spec.T)
        throw ConfigError("tau must divide the final time");

    std::vector<int> ms = cfg.bench_ms;
    if (ms.empty())
        ms = spec.dim == 2 ? std::vector<int>{16, 32, 64, 128, 256, 512}
                           : std::vector<int>{16, 32, 64, 128};
    const int repeats = std::max(1, cfg.repeats);
    const auto cap =
        static_cast<std::size_t>(cfg.memory_cap_gb * double(std::size_t(1) << 30));

    std::ostringstream csv;
    csv << "m,backend,scheme,seconds,per_step_seconds\n";
    for (int m : ms) {
        const Grid grid = unit_box_grid(spec.dim, m);
        for (PadeFamily fam : {PadeFamily::P02, PadeFamily::P04}) {
            const auto scheme = scheme_by_family(fam);
            std::vector<std::pair<std::string, int>> variants{{"spectral", 0},
                                                              {"thomas", 1}};
            if (spec.dim == 2 && m <= cfg.bench_nonslice_max) variants.push_back({"nonslice", 2});

            for (const auto& [label, kind] : variants) {
                try {
                    std::vector<double> samples;
                    if (kind == 2) {
                        const auto plan =
                            make_nonslice_plan(grid, tau, spec.kappa, spec.q, scheme, cap);
                        for (int rep = 0; rep < repeats; ++rep) {
                            StepperState st{0, 0.0, spec.initial_u(grid)};
                            const double t0 = now_seconds();
                            for (int n = 0; n < N; ++n) st = nonslice_step(plan, st, spec.source);
                            samples.push_back(now_seconds() - t0);
                        }
                    } else {
                        const BackendKind backend =
                            kind == 0 ? BackendKind::Spectral : BackendKind::Thomas;
                        const auto plan =
                            make_plan(grid, tau, spec.kappa, spec.q, scheme, backend, cap);
                        for (int rep = 0; rep < repeats; ++rep) {
                            StepperState st{0, 0.0, spec.initial_u(grid)};
                            const double t0 = now_seconds();
                            for (int n = 0; n < N; ++n) st = advance(plan, st, spec.source);
                            samples.push_back(now_seconds() - t0);
                        }
                    }
                    const double sec = median(samples);
                    csv << m << "," << label << "," << family_name(fam) << "," << sec << ","
                        << sec / N << "\n";
                    if (!cfg.quiet)
                        std::cerr << "bench m=" << m << " " << label << " "
                                  << family_name(fam) << ": " << sec << " s\n";
                } catch (const MemoryGuardError& e) {
                    if (!cfg.quiet)
                        std::cerr << "bench m=" << m << " " << label << " "
                                  << family_name(fam) << ": skipped (" << e.what() << ")\n";
                }
            }
        }
    }

    std::filesystem::create_directories(cfg.out);
    const auto path = cfg.out / ("timing_" + spec.name + ".csv");
    std::ofstream os(path, std::ios::trunc);
    os << csv.str();
    return csv.str();
}

} // namespace etdrd
