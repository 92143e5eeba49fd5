#include <cmath>
#include <utility>
#include <vector>

#include "etdrd/errors.hpp"
#include "etdrd/stepper.hpp"

namespace etdrd {

namespace {

void require_finite2(const Field& u, const Field& v, const char* what, double t, long n) {
    if (!u.all_finite() || !v.all_finite())
        throw StepperAbort(std::string(what) + " produced non-finite values at t=" +
                               std::to_string(t),
                           t, n);
}

} // namespace

Field SystemPlan::apply_Q(int component, int ell, const Field& f, Axis axis) const {
    const int a = axis_index(axis);
    const bool u = component == 0;
    if (backend == BackendKind::Spectral)
        return apply_Q_spectral(u ? spectral_u[a] : spectral_v[a], ell, tau, f, axis);
    if (backend == BackendKind::Thomas)
        return apply_Q_thomas(u ? thomas_u[a] : thomas_v[a], ell, tau, f, axis);
    throw ConfigError("system plans support the spectral and thomas backends only");
}

SystemPlan make_system_plan(const Grid& grid, double tau, double kappa_u, double kappa_v,
                            double q, const RationalScheme& scheme, BackendKind backend) {
    if (grid.dim != 2) throw ConfigError("two-component plans are 2D");
    if (!(tau > 0.0)) throw ConfigError("tau must be positive");
    if (!(kappa_u > 0.0) || !(kappa_v > 0.0))
        throw ConfigError("component diffusivities must be positive");

    SystemPlan plan;
    plan.grid = grid;
    plan.tau = tau;
    plan.kappa_u = kappa_u;
    plan.kappa_v = kappa_v;
    plan.q = q;
    plan.scheme = scheme;
    plan.backend = backend;

    for (int a = 0; a < grid.dim; ++a) {
        // one unit-diffusivity eigendecomposition serves both components;
        // component payloads differ only through scaled eigenvalues
        plan.unit_ops[a] = build_operator(grid, static_cast<Axis>(a), 1.0, q);
        if (backend == BackendKind::Spectral) {
            plan.factors[a] =
                std::make_shared<const SpectralFactor>(spectral_factor(plan.unit_ops[a]));
            const auto& lam = plan.factors[a]->eigvals;
            std::vector<double> lam_u(lam.size()), lam_v(lam.size());
            for (std::size_t k = 0; k < lam.size(); ++k) {
                lam_u[k] = kappa_u * lam[k];
                lam_v[k] = kappa_v * lam[k];
            }
            plan.spectral_u[a] = build_spectral_payload(plan.factors[a], tau, scheme, lam_u);
            plan.spectral_v[a] = build_spectral_payload(plan.factors[a], tau, scheme, lam_v);
        } else if (backend == BackendKind::Thomas) {
            plan.thomas_u[a] = build_thomas_payload(plan.unit_ops[a], tau, scheme, kappa_u);
            plan.thomas_v[a] = build_thomas_payload(plan.unit_ops[a], tau, scheme, kappa_v);
        } else {
            throw ConfigError("system plans support the spectral and thomas backends only");
        }
    }
    return plan;
}

// Same two-stage structure as the scalar 2D step, run on both components;
// the coupling enters only through the source evaluated on (U, V) pairs.
SystemState etd2rkds_step_system(const SystemPlan& plan, const SystemState& state,
                                 const SystemSource& f) {
    if (state.U.shape() != plan.grid.interior_shape() || !state.U.same_shape(state.V))
        throw ConfigError("system state shape does not match plan grid");

    const double t = state.t, tau = plan.tau;
    auto [fu, fv] = f.fn(t, state.U, state.V, plan.grid);
    require_finite2(fu, fv, "source", t, state.n);

    const Field w1u = plan.apply_Q(0, 1, state.U, Axis::Y);
    const Field w2u = plan.apply_Q(0, 1, fu, Axis::Y);
    const Field w1v = plan.apply_Q(1, 1, state.V, Axis::Y);
    const Field w2v = plan.apply_Q(1, 1, fv, Axis::Y);

    auto predict = [&](int c, const Field& w1, const Field& w2) {
        Field W = plan.apply_Q(c, 1, w1, Axis::X);
        const Field lin = plan.apply_Q(c, 2, w2, Axis::X);
        for (std::size_t i = 0; i < W.size(); ++i) W[i] += tau * lin[i];
        return W;
    };
    const Field Wu = predict(0, w1u, w2u);
    const Field Wv = predict(1, w1v, w2v);

    auto [gu, gv] = f.fn(t + tau, Wu, Wv, plan.grid);
    require_finite2(gu, gv, "source", t + tau, state.n);
    for (std::size_t i = 0; i < gu.size(); ++i) gu[i] -= w2u[i];
    for (std::size_t i = 0; i < gv.size(); ++i) gv[i] -= w2v[i];

    Field U1 = Wu;
    {
        const Field corr = plan.apply_Q(0, 3, gu, Axis::X);
        for (std::size_t i = 0; i < U1.size(); ++i) U1[i] += tau * corr[i];
    }
    Field V1 = Wv;
    {
        const Field corr = plan.apply_Q(1, 3, gv, Axis::X);
        for (std::size_t i = 0; i < V1.size(); ++i) V1[i] += tau * corr[i];
    }
    require_finite2(U1, V1, "step update", t + tau, state.n);
    return {state.n + 1, (state.n + 1) * tau, std::move(U1), std::move(V1)};
}

} // namespace etdrd
