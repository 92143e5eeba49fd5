#include "etdrd/stepper.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "etdrd/errors.hpp"

namespace etdrd {

namespace {

using cplx = std::complex<double>;

constexpr std::size_t kDefaultMemoryCap = std::size_t(3) << 30;  // 3 GiB

void require_finite(const Field& f, const char* what, double t, long step) {
    if (!f.all_finite())
        throw StepperAbort(std::string(what) + " produced non-finite values at t=" +
                               std::to_string(t) + " (max|.| before abort unknown)",
                           t, step);
}

void check_state(const StepperPlan& plan, const StepperState& state) {
    if (state.U.shape() != plan.grid.interior_shape())
        throw ConfigError("state shape does not match plan grid");
}

Field add_scaled(const Field& a, double s, const Field& b) {
    Field out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * b[i];
    return out;
}

} // namespace

double phi1(double x) {
    if (x < 1e-4) return 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0;
    return (1.0 - std::exp(-x)) / x;
}

double phi2(double x) {
    if (x < 1e-4) return 0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0;
    return (x - 1.0 + std::exp(-x)) / (x * x);
}

// Banded factorizations of tau*(A1 + A2) - s*I per pole; 2D only, bandwidth
// n_x.  The block boundary entries (i = n_x-1 coupling into the next
// y-block) are structural zeros, which the banded format stores explicitly.
struct NonSplitPayload {
    std::vector<BandedLDLT> pole_factors;  // aligned with scheme.terms[0]
    std::size_t bytes = 0;
};

namespace {

std::shared_ptr<const NonSplitPayload> build_nonsplit_payload(
    const Grid& grid, double tau, const std::array<ToeplitzTridiagOperator, 3>& ops,
    const RationalScheme& scheme, std::size_t memory_cap_bytes) {
    if (grid.dim != 2)
        throw ConfigError("non-split baseline is 2D only");
    const int nx = grid.interior(0), ny = grid.interior(1);
    const int n = nx * ny, bw = nx;
    const std::size_t need = scheme.terms[0].size() * banded_storage_bytes(n, bw);
    const std::size_t cap = memory_cap_bytes ? memory_cap_bytes : kDefaultMemoryCap;
    if (need > cap)
        throw MemoryGuardError(
            "non-split factorization needs " + std::to_string(need >> 20) +
            " MiB, above the " + std::to_string(cap >> 20) + " MiB cap");

    auto payload = std::make_shared<NonSplitPayload>();
    payload->bytes = need;
    for (const auto& t : scheme.terms[0]) {
        BandedLDLT B(n, bw);
        const cplx diag = tau * (ops[0].diag + ops[1].diag) - t.pole;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int col = i + j * nx;
                B.band(0, col) = diag;
                if (i + 1 < nx) B.band(1, col) = tau * ops[0].off;
                if (j + 1 < ny) B.band(bw, col) = tau * ops[1].off;
            }
        B.factor();
        payload->pole_factors.push_back(std::move(B));
    }
    return payload;
}

Field apply_Q_nonsplit(const StepperPlan& plan, int ell, const Field& field) {
    const auto& payload = *plan.nonsplit;
    const auto& terms = plan.scheme.for_ell(ell);
    Field out(field.dim(), field.shape());
    std::vector<cplx> x(field.size());
    for (std::size_t l = 0; l < terms.size(); ++l) {
        for (std::size_t i = 0; i < field.size(); ++i) x[i] = field[i];
        payload.pole_factors[l].solve(x.data());
        const cplx r = terms[l].residue;
        for (std::size_t i = 0; i < field.size(); ++i) out[i] += 2.0 * (r * x[i]).real();
    }
    return out;
}

} // namespace

Field StepperPlan::apply_Q(int ell, const Field& f, Axis axis) const {
    const int a = axis_index(axis);
    switch (backend) {
    case BackendKind::Spectral:
        return apply_Q_spectral(spectral[a], ell, tau, f, axis);
    case BackendKind::Thomas:
        return apply_Q_thomas(thomas[a], ell, tau, f, axis);
    default:
        throw ConfigError("directional rational applies need the spectral or thomas backend");
    }
}

StepperPlan make_plan(const Grid& grid, double tau, double kappa, double q,
                      const RationalScheme& scheme, BackendKind backend,
                      std::size_t memory_cap_bytes) {
    if (!(tau > 0.0)) throw ConfigError("tau must be positive");
    StepperPlan plan;
    plan.grid = grid;
    plan.tau = tau;
    plan.kappa = kappa;
    plan.q = q;
    plan.scheme = scheme;
    plan.backend = backend;

    for (int a = 0; a < grid.dim; ++a)
        plan.ops[a] = build_operator(grid, static_cast<Axis>(a), kappa, q);

    switch (backend) {
    case BackendKind::Spectral:
        for (int a = 0; a < grid.dim; ++a) {
            plan.factors[a] =
                std::make_shared<const SpectralFactor>(spectral_factor(plan.ops[a]));
            plan.spectral[a] = build_spectral_payload(plan.factors[a], tau, scheme);
        }
        break;
    case BackendKind::Thomas:
        for (int a = 0; a < grid.dim; ++a)
            plan.thomas[a] = build_thomas_payload(plan.ops[a], tau, scheme);
        break;
    case BackendKind::ExactExpReference:
        for (int a = 0; a < grid.dim; ++a) {
            if (plan.ops[a].n > 64)
                throw ConfigError("exact-exponential reference is limited to 64 interior "
                                  "points per axis");
            plan.factors[a] =
                std::make_shared<const SpectralFactor>(spectral_factor(plan.ops[a]));
            const auto& lam = plan.factors[a]->eigvals;
            auto& ev = plan.exp_vals[a];
            ev.resize(lam.size());
            for (std::size_t k = 0; k < lam.size(); ++k) ev[k] = std::exp(-tau * lam[k]);
        }
        {
            // x-axis update multipliers: (1-e^{-tau l})/l and (tau l - 1 + e^{-tau l})/(l^2 tau)
            const auto& lam = plan.factors[0]->eigvals;
            auto& g1 = plan.g1_vals[0];
            auto& h = plan.h_vals[0];
            g1.resize(lam.size());
            h.resize(lam.size());
            for (std::size_t k = 0; k < lam.size(); ++k) {
                const double x = tau * lam[k];
                g1[k] = tau * phi1(x);
                h[k] = tau * phi2(x);
            }
        }
        break;
    case BackendKind::NonSplitBanded:
        plan.nonsplit =
            build_nonsplit_payload(grid, tau, plan.ops, scheme, memory_cap_bytes);
        break;
    }
    return plan;
}

// Two-stage update: predictor combines the directional rational weights of
// the downwind (y, then x) factors; corrector reuses the y-filtered source
// w2 so each step performs exactly one y-apply per stage input.
StepperState etd2rkds_step_2d(const StepperPlan& plan, const StepperState& state,
                              const SourceFunction& f) {
    if (plan.grid.dim != 2) throw ConfigError("2D step on non-2D plan");
    if (plan.backend != BackendKind::Spectral && plan.backend != BackendKind::Thomas)
        throw ConfigError("2D split step requires the spectral or thomas backend");
    check_state(plan, state);

    const double t = state.t, tau = plan.tau;
    const Field fn = f(t, state.U, plan.grid);
    require_finite(fn, "source", t, state.n);

    const Field w1 = plan.apply_Q(1, state.U, Axis::Y);
    const Field w2 = plan.apply_Q(1, fn, Axis::Y);

    Field What, U1;
    if (plan.backend == BackendKind::Spectral) {
        // transformed x-stage: one basis change per stage input, shared by
        // the predictor combination and the corrector's w2 reuse
        const auto& fac = *plan.factors[0];
        const auto& d = plan.spectral[0].d;
        Field w1b = contract_axis(fac.P, fac.n, w1, Axis::X, true);
        Field w2b = contract_axis(fac.P, fac.n, w2, Axis::X, true);
        Field mix(w1b.dim(), w1b.shape());
        const int nx = w1b.nx();
        for (int j = 0; j < w1b.ny(); ++j)
            for (int i = 0; i < nx; ++i)
                mix.at(i, j) = w1b.at(i, j) * d[0][i] + tau * w2b.at(i, j) * d[1][i];
        What = contract_axis(fac.P, fac.n, mix, Axis::X);
        for (std::size_t i = 0; i < What.size(); ++i) What[i] *= 2.0;

        Field fw = f(t + tau, What, plan.grid);
        require_finite(fw, "source", t + tau, state.n);
        Field gb = contract_axis(fac.P, fac.n, fw, Axis::X, true);
        for (int j = 0; j < gb.ny(); ++j)
            for (int i = 0; i < nx; ++i)
                gb.at(i, j) = (gb.at(i, j) - w2b.at(i, j)) * d[2][i];
        const Field corr = contract_axis(fac.P, fac.n, gb, Axis::X);
        U1 = add_scaled(What, 2.0 * tau, corr);
    } else {
        What = add_scaled(plan.apply_Q(1, w1, Axis::X), tau, plan.apply_Q(2, w2, Axis::X));
        Field fw = f(t + tau, What, plan.grid);
        require_finite(fw, "source", t + tau, state.n);
        for (std::size_t i = 0; i < fw.size(); ++i) fw[i] -= w2[i];
        U1 = add_scaled(What, tau, plan.apply_Q(3, fw, Axis::X));
    }
    require_finite(U1, "step update", t + tau, state.n);
    return {state.n + 1, (state.n + 1) * tau, std::move(U1)};
}

// 3D: filter both stage inputs through the z then y rational factors, then
// run the same x-direction update as 2D.
StepperState etd2rkds_step_3d(const StepperPlan& plan, const StepperState& state,
                              const SourceFunction& f) {
    if (plan.grid.dim != 3) throw ConfigError("3D step on non-3D plan");
    if (plan.backend != BackendKind::Spectral && plan.backend != BackendKind::Thomas)
        throw ConfigError("3D split step requires the spectral or thomas backend");
    check_state(plan, state);

    const double t = state.t, tau = plan.tau;
    const Field fn = f(t, state.U, plan.grid);
    require_finite(fn, "source", t, state.n);

    Field w1 = plan.apply_Q(1, state.U, Axis::Z);
    w1 = plan.apply_Q(1, w1, Axis::Y);
    Field w2 = plan.apply_Q(1, fn, Axis::Z);
    w2 = plan.apply_Q(1, w2, Axis::Y);

    Field What = add_scaled(plan.apply_Q(1, w1, Axis::X), tau, plan.apply_Q(2, w2, Axis::X));
    Field fw = f(t + tau, What, plan.grid);
    require_finite(fw, "source", t + tau, state.n);
    for (std::size_t i = 0; i < fw.size(); ++i) fw[i] -= w2[i];
    Field U1 = add_scaled(What, tau, plan.apply_Q(3, fw, Axis::X));

    require_finite(U1, "step update", t + tau, state.n);
    return {state.n + 1, (state.n + 1) * tau, std::move(U1)};
}

StepperState etd2rkds_reference_step(const StepperPlan& plan, const StepperState& state,
                                     const SourceFunction& f) {
    if (plan.backend != BackendKind::ExactExpReference)
        throw ConfigError("reference step requires the exact backend");
    check_state(plan, state);

    const double t = state.t, tau = plan.tau;
    const Field fn = f(t, state.U, plan.grid);
    require_finite(fn, "source", t, state.n);

    auto exp_away = [&](const Field& g) {
        // e^{-tau A2} = product of the exponential factors of every non-x axis
        Field out = g;
        for (int a = plan.grid.dim - 1; a >= 1; --a)
            out = spectral_diag_apply(*plan.factors[a], plan.exp_vals[a], out,
                                      static_cast<Axis>(a), 1.0);
        return out;
    };

    const Field E2U = exp_away(state.U);
    const Field E2f = exp_away(fn);
    const auto& fx = *plan.factors[0];
    Field What = spectral_diag_apply(fx, plan.exp_vals[0], E2U, Axis::X, 1.0);
    {
        const Field lin = spectral_diag_apply(fx, plan.g1_vals[0], E2f, Axis::X, 1.0);
        for (std::size_t i = 0; i < What.size(); ++i) What[i] += lin[i];
    }
    Field fw = f(t + tau, What, plan.grid);
    require_finite(fw, "source", t + tau, state.n);
    for (std::size_t i = 0; i < fw.size(); ++i) fw[i] -= E2f[i];
    const Field corr = spectral_diag_apply(fx, plan.h_vals[0], fw, Axis::X, 1.0);
    Field U1 = What;
    for (std::size_t i = 0; i < U1.size(); ++i) U1[i] += corr[i];

    require_finite(U1, "step update", t + tau, state.n);
    return {state.n + 1, (state.n + 1) * tau, std::move(U1)};
}

StepperState etd2rk_nonsplit_step(const StepperPlan& plan, const StepperState& state,
                                  const SourceFunction& f) {
    if (plan.backend != BackendKind::NonSplitBanded || !plan.nonsplit)
        throw ConfigError("non-split step requires the nonsplit backend");
    check_state(plan, state);

    const double t = state.t, tau = plan.tau;
    const Field fn = f(t, state.U, plan.grid);
    require_finite(fn, "source", t, state.n);

    Field What = add_scaled(apply_Q_nonsplit(plan, 1, state.U), tau,
                            apply_Q_nonsplit(plan, 2, fn));
    Field fw = f(t + tau, What, plan.grid);
    require_finite(fw, "source", t + tau, state.n);
    for (std::size_t i = 0; i < fw.size(); ++i) fw[i] -= fn[i];
    Field U1 = add_scaled(What, tau, apply_Q_nonsplit(plan, 3, fw));

    require_finite(U1, "step update", t + tau, state.n);
    return {state.n + 1, (state.n + 1) * tau, std::move(U1)};
}

StepperState advance(const StepperPlan& plan, const StepperState& state,
                     const SourceFunction& f) {
    switch (plan.backend) {
    case BackendKind::Spectral:
    case BackendKind::Thomas:
        return plan.grid.dim == 3 ? etd2rkds_step_3d(plan, state, f)
                                  : etd2rkds_step_2d(plan, state, f);
    case BackendKind::ExactExpReference:
        return etd2rkds_reference_step(plan, state, f);
    case BackendKind::NonSplitBanded:
        return etd2rk_nonsplit_step(plan, state, f);
    }
    throw ConfigError("unknown backend");
}

} // namespace etdrd
