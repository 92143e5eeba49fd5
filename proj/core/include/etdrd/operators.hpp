#pragma once

#include <vector>

#include "etdrd/grid.hpp"

namespace etdrd {

// One-dimensional factor of the split stiffness operator: the n x n
// symmetric Toeplitz tridiagonal matrix with
//   diag = (2*kappa + (q/dim_share)*h^2) / h^2,   off = -kappa / h^2.
// The linear reaction coefficient q is apportioned evenly across the
// dim_share directional factors so the factors sum to the unsplit operator.
struct ToeplitzTridiagOperator {
    int n = 0;
    double diag = 0.0;
    double off = 0.0;
    // provenance of the entries, kept for reporting and payload rebuilds
    double kappa = 0.0;
    double q = 0.0;
    double h = 0.0;
    int dim_share = 2;
};

ToeplitzTridiagOperator build_operator(const Grid& grid, Axis axis,
                                       double kappa, double q);

// Orthogonal eigendecomposition A = P diag(eigvals) P^T of a
// ToeplitzTridiagOperator, by the closed form for the Dirichlet Laplacian:
//   eigvals[k] = diag + 2*off*cos((k+1) pi / (n+1))          (ascending)
//   P(i,k)     = sqrt(2/(n+1)) * sin((i+1)(k+1) pi / (n+1))
// P is stored column-major (column k = eigenvector k) and satisfies
// P^T == P up to roundoff, but callers must not rely on that symmetry.
// Sign convention: first component of every eigenvector is positive.
struct SpectralFactor {
    int n = 0;
    std::vector<double> eigvals;  // ascending, all > 0 for kappa>0, q>=0
    std::vector<double> P;        // column-major n*n

    double p(int i, int k) const { return P[static_cast<std::size_t>(k) * n + i]; }
};

SpectralFactor spectral_factor(const ToeplitzTridiagOperator& op);

} // namespace etdrd
