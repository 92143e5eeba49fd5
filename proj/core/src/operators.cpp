#include "etdrd/operators.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "etdrd/errors.hpp"

namespace etdrd {

ToeplitzTridiagOperator build_operator(const Grid& grid, Axis axis, double kappa,
                                       double q) {
    const int a = axis_index(axis);
    if (a >= grid.dim)
        throw ConfigError("axis " + std::to_string(a) + " out of range for " +
                          std::to_string(grid.dim) + "D grid");
    if (!(kappa > 0.0))
        throw ConfigError("diffusivity must be positive");
    if (q < 0.0)
        throw ConfigError("linear reaction coefficient must be nonnegative");

    ToeplitzTridiagOperator op;
    op.n = grid.interior(a);
    op.kappa = kappa;
    op.q = q;
    op.h = grid.h[a];
    op.dim_share = grid.dim;
    // q is split evenly across the directional factors so the factors sum to
    // the full operator kappa*(-Laplacian) + q*I.
    const double h2 = op.h * op.h;
    op.diag = (2.0 * kappa + (q / grid.dim) * h2) / h2;
    op.off = -kappa / h2;
    return op;
}

SpectralFactor spectral_factor(const ToeplitzTridiagOperator& op) {
    const int n = op.n;
    if (n < 1) throw ConfigError("operator order must be >= 1");

    SpectralFactor f;
    f.n = n;
    f.eigvals.resize(n);
    f.P.assign(static_cast<std::size_t>(n) * n, 0.0);

    const double pi = std::numbers::pi;
    const double scale = std::sqrt(2.0 / (n + 1));
    for (int k = 0; k < n; ++k) {
        const double theta = (k + 1) * pi / (n + 1);
        // off < 0 and cos decreasing => eigenvalues ascend with k
        f.eigvals[k] = op.diag + 2.0 * op.off * std::cos(theta);
        double* col = f.P.data() + static_cast<std::size_t>(k) * n;
        for (int i = 0; i < n; ++i)
            col[i] = scale * std::sin((i + 1) * theta);
    }
    return f;
}

} // namespace etdrd
