#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "etdrd/banded.hpp"
#include "etdrd/field.hpp"
#include "etdrd/grid.hpp"
#include "etdrd/operators.hpp"
#include "etdrd/rational.hpp"
#include "etdrd/tensor_ops.hpp"

namespace etdrd {

struct SourceFunction {
    std::function<Field(double t, const Field& u, const Grid& grid)> fn;
    bool autonomous = false;

    Field operator()(double t, const Field& u, const Grid& g) const { return fn(t, u, g); }
};

// Two-component coupled source (f_u, f_v).
struct SystemSource {
    std::function<std::pair<Field, Field>(double t, const Field& u, const Field& v,
                                          const Grid& grid)> fn;
};

// Precomputed per-(grid, tau, kappa, q, scheme, backend) artifacts.  A plan is
// immutable after construction; rebuilding is the only way to change tau.
struct NonSplitPayload;  // banded factorizations of tau*(A1+A2) - s*I, 2D only

struct StepperPlan {
    Grid grid;
    double tau = 0.0;
    double kappa = 1.0;
    double q = 0.0;
    RationalScheme scheme;
    BackendKind backend = BackendKind::Spectral;

    std::array<ToeplitzTridiagOperator, 3> ops{};
    std::array<std::shared_ptr<const SpectralFactor>, 3> factors{};  // null for Thomas
    std::array<SpectralAxisPayload, 3> spectral{};
    std::array<ThomasAxisPayload, 3> thomas{};

    // exact-exponential reference data, eigenvalue-wise per axis
    std::array<std::vector<double>, 3> exp_vals;   // e^{-tau*lambda}
    std::array<std::vector<double>, 3> g1_vals;    // (1 - e^{-tau*lambda})/lambda
    std::array<std::vector<double>, 3> h_vals;     // (tau*lambda - 1 + e^{-tau*lambda})/(tau*lambda^2)

    std::shared_ptr<const NonSplitPayload> nonsplit;

    Field apply_Q(int ell, const Field& f, Axis axis) const;  // dispatch on backend
};

// memory_cap_bytes guards the banded nonsplit factorization (0 = default cap).
StepperPlan make_plan(const Grid& grid, double tau, double kappa, double q,
                      const RationalScheme& scheme, BackendKind backend,
                      std::size_t memory_cap_bytes = 0);

struct StepperState {
    long n = 0;
    double t = 0.0;
    Field U;
};

StepperState etd2rkds_step_2d(const StepperPlan& plan, const StepperState& state,
                              const SourceFunction& f);
StepperState etd2rkds_step_3d(const StepperPlan& plan, const StepperState& state,
                              const SourceFunction& f);

// Exact-exponential two-stage reference; dense spectral evaluation, so grids
// above 64 interior points per axis are refused.
StepperState etd2rkds_reference_step(const StepperPlan& plan, const StepperState& state,
                                     const SourceFunction& f);

// Non-split baseline: rational weights of the full 2D operator A1+A2 via
// complex banded LDL^T solves (bandwidth n_x), factored once per plan.
StepperState etd2rk_nonsplit_step(const StepperPlan& plan, const StepperState& state,
                                  const SourceFunction& f);

// Single dispatch honoring plan.backend and grid dimension.
StepperState advance(const StepperPlan& plan, const StepperState& state,
                     const SourceFunction& f);

// --- two-component (u,v) plans ----------------------------------------------
// One unit-diffusivity eigendecomposition per axis serves both components;
// per-component payloads only differ in their scaled-eigenvalue d-vectors.
struct SystemPlan {
    Grid grid;
    double tau = 0.0;
    double kappa_u = 1.0, kappa_v = 1.0;
    double q = 0.0;
    RationalScheme scheme;
    BackendKind backend = BackendKind::Spectral;

    std::array<ToeplitzTridiagOperator, 3> unit_ops{};
    std::array<std::shared_ptr<const SpectralFactor>, 3> factors{};
    std::array<SpectralAxisPayload, 3> spectral_u{}, spectral_v{};
    std::array<ThomasAxisPayload, 3> thomas_u{}, thomas_v{};

    Field apply_Q(int component, int ell, const Field& f, Axis axis) const;
};

SystemPlan make_system_plan(const Grid& grid, double tau, double kappa_u, double kappa_v,
                            double q, const RationalScheme& scheme, BackendKind backend);

struct SystemState {
    long n = 0;
    double t = 0.0;
    Field U, V;
};

SystemState etd2rkds_step_system(const SystemPlan& plan, const SystemState& state,
                                 const SystemSource& f);

// phi-function helpers used by the reference stepper; series branch below
// x = 1e-4 avoids cancellation, branches agree to 1e-12 at the switch.
double phi1(double x);  // (1 - e^{-x})/x
double phi2(double x);  // (x - 1 + e^{-x})/x^2

} // namespace etdrd
