#pragma once

#include <array>
#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "etdrd/field.hpp"
#include "etdrd/grid.hpp"
#include "etdrd/operators.hpp"
#include "etdrd/rational.hpp"

namespace etdrd {

// out[...,k,...] = sum_i M[k,i] * field[...,i,...] along `axis`; M is n x n
// column-major, n must equal the field extent on that axis.  With
// transpose=true the contraction uses M^T instead (no copy is made).
Field contract_axis(std::span<const double> M, int n, const Field& field, Axis axis,
                    bool transpose = false);

// Entrywise scale of every pencil along d.axis by d.values.
Field hadamard_axis(const Field& field, const DVector& d, Axis axis);

// alpha * P * diag(vals) * P^T applied along one axis.  The shared kernel
// behind the rational applies (alpha=2) and the exponential reference
// stepper (alpha=1).
Field spectral_diag_apply(const SpectralFactor& factor, std::span<const double> vals,
                          const Field& field, Axis axis, double alpha);

enum class BackendKind { Spectral, Thomas, NonSplitBanded, ExactExpReference };

std::string backend_name(BackendKind k);
BackendKind backend_by_name(const std::string& name);

// --- Sylvester/spectral backend -------------------------------------------
// Directional payload: the eigendecomposition of one ToeplitzTridiagOperator
// plus the d-vectors for each requested ell at a fixed (tau, scheme).
struct SpectralAxisPayload {
    std::shared_ptr<const SpectralFactor> factor;
    double tau = 0.0;
    PadeFamily family = PadeFamily::P02;
    std::array<std::vector<double>, 3> d;  // index ell-1; empty if not built

    int n() const { return factor ? factor->n : 0; }
};

// eigvals defaults to the factor's own; passing scaled eigenvalues (kappa_c *
// lambda) reuses one decomposition across components with distinct
// diffusivities.
SpectralAxisPayload build_spectral_payload(std::shared_ptr<const SpectralFactor> factor,
                                           double tau, const RationalScheme& scheme,
                                           std::span<const double> eigvals = {},
                                           std::span<const int> ells = {});

Field apply_Q_spectral(const SpectralAxisPayload& payload, int ell, double tau,
                       const Field& field, Axis axis);

// --- LU/Thomas backend ------------------------------------------------------
// One cached complex tridiagonal factorization per pole: tau*A - s*I with
// constant diagonal c = tau*diag - s and constant off-diagonal e = tau*off.
// No pivoting; |Im(s)| > 0 keeps every pivot away from zero (checked).
struct ThomasPoleFactor {
    std::complex<double> pole;
    std::vector<std::complex<double>> mul;    // forward multipliers, mul[0] unused
    std::vector<std::complex<double>> piv;    // diagonal pivots
};

struct ThomasAxisPayload {
    int n = 0;
    double tau = 0.0;
    std::complex<double> off;                 // tau * op.off
    PadeFamily family = PadeFamily::P02;
    std::vector<ThomasPoleFactor> poles;
    // residues[ell-1][l] pairs with poles[l]; empty vector = ell not built
    std::array<std::vector<std::complex<double>>, 3> residues;
};

// kappa_scale rescales the operator entries (diffusivity reuse for systems).
ThomasAxisPayload build_thomas_payload(const ToeplitzTridiagOperator& op, double tau,
                                       const RationalScheme& scheme,
                                       double kappa_scale = 1.0,
                                       std::span<const int> ells = {});

Field apply_Q_thomas(const ThomasAxisPayload& payload, int ell, double tau,
                     const Field& field, Axis axis);

// --- dense cross-check ------------------------------------------------------
// Builds the full Kronecker embedding of each directional operator on the
// grid interior, solves (tau*A_dir - s*I) densely per pole, and compares
// 2*Re(sum r*w) against both sliced backends.  Interior capped at 8 per axis.
struct SliceEquivalenceReport {
    double max_abs_deviation = 0.0;
    std::array<double, 3> per_axis{0.0, 0.0, 0.0};
};

SliceEquivalenceReport slice_equivalence_oracle(const Grid& grid, double tau,
                                                const RationalScheme& scheme, int ell,
                                                const Field& field, double kappa = 1.0,
                                                double q = 1.0);

} // namespace etdrd
