#include "etdrd/tensor_ops.hpp"

#include <cblas.h>

#include <cmath>
#include <cstring>
#include <string>

#include "etdrd/errors.hpp"

namespace etdrd {

namespace {

using cplx = std::complex<double>;

void check_axis(const Field& f, Axis axis) {
    if (axis_index(axis) >= f.dim())
        throw ConfigError("axis out of range for field dimension");
}

// C = alpha * op(M) applied along `axis` of `in`, written to `out`.
// The x contraction is a single left GEMM; y in 3D runs one GEMM per z-slab;
// y in 2D and z in 3D are single right GEMMs on the flattened view.
void gemm_axis(const double* M, int n, const Field& in, Field& out, Axis axis,
               bool transpose, double alpha) {
    const int nx = in.nx(), ny = in.ny(), nz = in.nz();
    switch (axis) {
    case Axis::X: {
        const int rest = ny * nz;
        cblas_dgemm(CblasColMajor, transpose ? CblasTrans : CblasNoTrans, CblasNoTrans,
                    nx, rest, nx, alpha, M, nx, in.data(), nx, 0.0, out.data(), nx);
        break;
    }
    case Axis::Y: {
        // out_slab = in_slab * op(M)^T  => transB flips relative to `transpose`
        const auto tb = transpose ? CblasNoTrans : CblasTrans;
        const std::size_t slab = static_cast<std::size_t>(nx) * ny;
        for (int k = 0; k < nz; ++k)
            cblas_dgemm(CblasColMajor, CblasNoTrans, tb, nx, ny, ny, alpha,
                        in.data() + k * slab, nx, M, ny, 0.0, out.data() + k * slab, nx);
        break;
    }
    case Axis::Z: {
        const auto tb = transpose ? CblasNoTrans : CblasTrans;
        const int rows = nx * ny;
        cblas_dgemm(CblasColMajor, CblasNoTrans, tb, rows, nz, nz, alpha, in.data(), rows,
                    M, nz, 0.0, out.data(), rows);
        break;
    }
    }
}

void hadamard_inplace(Field& f, std::span<const double> d, Axis axis) {
    const int nx = f.nx(), ny = f.ny(), nz = f.nz();
    double* p = f.data();
    switch (axis) {
    case Axis::X:
        for (std::size_t r = 0, rest = static_cast<std::size_t>(ny) * nz; r < rest; ++r) {
            double* pencil = p + r * nx;
            for (int i = 0; i < nx; ++i) pencil[i] *= d[i];
        }
        break;
    case Axis::Y:
        for (int k = 0; k < nz; ++k)
            for (int j = 0; j < ny; ++j) {
                double* col = p + (static_cast<std::size_t>(k) * ny + j) * nx;
                const double s = d[j];
                for (int i = 0; i < nx; ++i) col[i] *= s;
            }
        break;
    case Axis::Z: {
        const std::size_t plane = static_cast<std::size_t>(nx) * ny;
        for (int k = 0; k < nz; ++k) {
            double* pl = p + k * plane;
            const double s = d[k];
            for (std::size_t i = 0; i < plane; ++i) pl[i] *= s;
        }
        break;
    }
    }
}

int extent(const Field& f, Axis axis) { return f.shape()[axis_index(axis)]; }

} // namespace

std::string backend_name(BackendKind k) {
    switch (k) {
    case BackendKind::Spectral: return "spectral";
    case BackendKind::Thomas: return "thomas";
    case BackendKind::NonSplitBanded: return "nonsplit";
    case BackendKind::ExactExpReference: return "exact";
    }
    return "?";
}

BackendKind backend_by_name(const std::string& name) {
    if (name == "spectral") return BackendKind::Spectral;
    if (name == "thomas") return BackendKind::Thomas;
    if (name == "nonsplit") return BackendKind::NonSplitBanded;
    if (name == "exact") return BackendKind::ExactExpReference;
    throw ConfigError("unknown backend '" + name +
                      "' (expected spectral, thomas, nonsplit, or exact)");
}

Field contract_axis(std::span<const double> M, int n, const Field& field, Axis axis,
                    bool transpose) {
    check_axis(field, axis);
    if (n != extent(field, axis))
        throw ConfigError("contract_axis: matrix order " + std::to_string(n) +
                          " does not match field extent " +
                          std::to_string(extent(field, axis)));
    if (M.size() != static_cast<std::size_t>(n) * n)
        throw ConfigError("contract_axis: matrix storage size mismatch");
    Field out(field.dim(), field.shape());
    gemm_axis(M.data(), n, field, out, axis, transpose, 1.0);
    return out;
}

Field hadamard_axis(const Field& field, const DVector& d, Axis axis) {
    check_axis(field, axis);
    if (static_cast<int>(d.values.size()) != extent(field, axis))
        throw ConfigError("hadamard_axis: d-vector length mismatch");
    Field out = field;
    hadamard_inplace(out, d.values, axis);
    return out;
}

Field spectral_diag_apply(const SpectralFactor& factor, std::span<const double> vals,
                          const Field& field, Axis axis, double alpha) {
    check_axis(field, axis);
    const int n = extent(field, axis);
    if (factor.n != n || static_cast<int>(vals.size()) != n)
        throw ConfigError("spectral_diag_apply: factor/vals size mismatch");
    Field tmp(field.dim(), field.shape());
    gemm_axis(factor.P.data(), n, field, tmp, axis, true, 1.0);
    hadamard_inplace(tmp, vals, axis);
    Field out(field.dim(), field.shape());
    gemm_axis(factor.P.data(), n, tmp, out, axis, false, alpha);
    return out;
}

SpectralAxisPayload build_spectral_payload(std::shared_ptr<const SpectralFactor> factor,
                                           double tau, const RationalScheme& scheme,
                                           std::span<const double> eigvals,
                                           std::span<const int> ells) {
    if (!factor) throw ConfigError("null spectral factor");
    if (!(tau > 0.0)) throw ConfigError("tau must be positive");
    SpectralAxisPayload p;
    p.factor = std::move(factor);
    p.tau = tau;
    p.family = scheme.name;
    const std::span<const double> lam =
        eigvals.empty() ? std::span<const double>(p.factor->eigvals) : eigvals;
    if (static_cast<int>(lam.size()) != p.factor->n)
        throw ConfigError("eigenvalue list length mismatch");
    static constexpr int all_ells[] = {1, 2, 3};
    for (int ell : ells.empty() ? std::span<const int>(all_ells) : ells)
        p.d[ell - 1] = dvector_values(lam, tau, scheme, ell);
    return p;
}

Field apply_Q_spectral(const SpectralAxisPayload& payload, int ell, double tau,
                       const Field& field, Axis axis) {
    if (ell < 1 || ell > 3) throw ConfigError("ell must be 1, 2, or 3");
    if (payload.d[ell - 1].empty())
        throw ConfigError("no d-vector precomputed for ell=" + std::to_string(ell));
    if (tau != payload.tau)
        throw ConfigError("payload was precomputed for a different tau");
    return spectral_diag_apply(*payload.factor, payload.d[ell - 1], field, axis, 2.0);
}

// --- dense oracle -------------------------------------------------------

namespace {

// Partial-pivot Gaussian elimination; fine at oracle sizes (N <= 512).
void dense_solve(std::vector<cplx> A, int n, std::vector<cplx>& b) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(A[static_cast<std::size_t>(col) * n + col]);
        for (int r = col + 1; r < n; ++r) {
            const double v = std::abs(A[static_cast<std::size_t>(col) * n + r]);
            if (v > best) { best = v; piv = r; }
        }
        if (best == 0.0) throw NumericsError("singular dense oracle matrix");
        if (piv != col) {
            for (int c = 0; c < n; ++c)
                std::swap(A[static_cast<std::size_t>(c) * n + col],
                          A[static_cast<std::size_t>(c) * n + piv]);
            std::swap(b[col], b[piv]);
        }
        const cplx d = A[static_cast<std::size_t>(col) * n + col];
        for (int r = col + 1; r < n; ++r) {
            const cplx f = A[static_cast<std::size_t>(col) * n + r] / d;
            if (f == cplx(0.0, 0.0)) continue;
            for (int c = col; c < n; ++c)
                A[static_cast<std::size_t>(c) * n + r] -= f * A[static_cast<std::size_t>(c) * n + col];
            b[r] -= f * b[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        cplx acc = b[r];
        for (int c = r + 1; c < n; ++c)
            acc -= A[static_cast<std::size_t>(c) * n + r] * b[c];
        b[r] = acc / A[static_cast<std::size_t>(r) * n + r];
    }
}

// Dense Kronecker embedding of the directional operator along `axis` over the
// full interior: row/col indices follow the field's linear order.
std::vector<double> kron_embed(const Grid& grid, const ToeplitzTridiagOperator& op,
                               Axis axis) {
    const auto sh = grid.interior_shape();
    const std::size_t N = static_cast<std::size_t>(sh[0]) * sh[1] * sh[2];
    std::vector<double> K(N * N, 0.0);
    const int a = axis_index(axis);
    auto unravel = [&](std::size_t lin, int& i, int& j, int& k) {
        i = static_cast<int>(lin % sh[0]);
        j = static_cast<int>((lin / sh[0]) % sh[1]);
        k = static_cast<int>(lin / (static_cast<std::size_t>(sh[0]) * sh[1]));
    };
    auto ravel = [&](int i, int j, int k) {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(sh[0]) * (j + static_cast<std::size_t>(sh[1]) * k);
    };
    for (std::size_t r = 0; r < N; ++r) {
        int c[3];
        unravel(r, c[0], c[1], c[2]);
        K[r * N + r] = op.diag;  // column-major: (r,r)
        if (c[a] > 0) {
            int cc[3] = {c[0], c[1], c[2]};
            cc[a] -= 1;
            K[ravel(cc[0], cc[1], cc[2]) * N + r] = op.off;
        }
        if (c[a] < sh[a] - 1) {
            int cc[3] = {c[0], c[1], c[2]};
            cc[a] += 1;
            K[ravel(cc[0], cc[1], cc[2]) * N + r] = op.off;
        }
    }
    return K;
}

} // namespace

SliceEquivalenceReport slice_equivalence_oracle(const Grid& grid, double tau,
                                                const RationalScheme& scheme, int ell,
                                                const Field& field, double kappa,
                                                double q) {
    for (int a = 0; a < grid.dim; ++a)
        if (grid.interior(a) > 8)
            throw ConfigError("slice equivalence oracle is capped at 8 interior points per axis");
    if (field.shape() != grid.interior_shape())
        throw ConfigError("field shape does not match grid interior");

    const auto& terms = scheme.for_ell(ell);
    const auto sh = grid.interior_shape();
    const std::size_t N = static_cast<std::size_t>(sh[0]) * sh[1] * sh[2];

    SliceEquivalenceReport report;
    for (int a = 0; a < grid.dim; ++a) {
        const Axis axis = static_cast<Axis>(a);
        const auto op = build_operator(grid, axis, kappa, q);
        const auto K = kron_embed(grid, op, axis);

        std::vector<double> dense(N, 0.0);
        for (const auto& t : terms) {
            std::vector<cplx> A(N * N);
            for (std::size_t idx = 0; idx < N * N; ++idx) A[idx] = tau * K[idx];
            for (std::size_t r = 0; r < N; ++r) A[r * N + r] -= t.pole;
            std::vector<cplx> b(N);
            for (std::size_t r = 0; r < N; ++r) b[r] = field[r];
            dense_solve(std::move(A), static_cast<int>(N), b);
            for (std::size_t r = 0; r < N; ++r) dense[r] += 2.0 * (t.residue * b[r]).real();
        }

        auto factor = std::make_shared<const SpectralFactor>(spectral_factor(op));
        const auto spec = build_spectral_payload(factor, tau, scheme);
        const Field via_spectral = apply_Q_spectral(spec, ell, tau, field, axis);
        const auto thom = build_thomas_payload(op, tau, scheme);
        const Field via_thomas = apply_Q_thomas(thom, ell, tau, field, axis);

        double dev = 0.0;
        for (std::size_t r = 0; r < N; ++r) {
            dev = std::max(dev, std::abs(via_spectral[r] - dense[r]));
            dev = std::max(dev, std::abs(via_thomas[r] - dense[r]));
        }
        report.per_axis[a] = dev;
        report.max_abs_deviation = std::max(report.max_abs_deviation, dev);
    }
    return report;
}

} // namespace etdrd
