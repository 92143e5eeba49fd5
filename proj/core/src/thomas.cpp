#include <cmath>
#include <string>
#include <vector>

#include "etdrd/errors.hpp"
#include "etdrd/tensor_ops.hpp"

namespace etdrd {

namespace {

using cplx = std::complex<double>;

ThomasPoleFactor factor_pole(int n, cplx c, cplx e, cplx pole) {
    ThomasPoleFactor f;
    f.pole = pole;
    f.mul.resize(n);
    f.piv.resize(n);
    f.piv[0] = c;
    for (int i = 1; i < n; ++i) {
        if (std::abs(f.piv[i - 1]) < 1e-30)
            throw NumericsError("Thomas pivot underflow at row " + std::to_string(i - 1));
        f.mul[i] = e / f.piv[i - 1];
        f.piv[i] = c - f.mul[i] * e;
    }
    if (std::abs(f.piv[n - 1]) < 1e-30)
        throw NumericsError("Thomas pivot underflow at last row");
    return f;
}

// Contiguous pencils: forward/back per pencil with a small complex scratch.
void solve_axis_x(const ThomasPoleFactor& f, cplx e, cplx r, const double* b, double* out,
                  int nx, std::size_t pencils, std::vector<cplx>& scratch) {
    scratch.resize(nx);
    cplx* w = scratch.data();
    for (std::size_t p = 0; p < pencils; ++p) {
        const double* bp = b + p * nx;
        double* op = out + p * nx;
        w[0] = bp[0];
        for (int i = 1; i < nx; ++i) w[i] = bp[i] - f.mul[i] * w[i - 1];
        w[nx - 1] /= f.piv[nx - 1];
        op[nx - 1] += 2.0 * (r * w[nx - 1]).real();
        for (int i = nx - 2; i >= 0; --i) {
            w[i] = (w[i] - e * w[i + 1]) / f.piv[i];
            op[i] += 2.0 * (r * w[i]).real();
        }
    }
}

// Strided pencils: the recurrence índex walks columns of an (R x n) view, so
// each elimination/substitution step is a vectorized pass over R rows.
void solve_axis_planes(const ThomasPoleFactor& f, cplx e, cplx r, const double* b,
                       double* out, std::size_t R, int n, std::vector<cplx>& scratch) {
    scratch.resize(R * static_cast<std::size_t>(n));
    cplx* w = scratch.data();
    for (std::size_t i = 0; i < R; ++i) w[i] = b[i];
    for (int j = 1; j < n; ++j) {
        const cplx m = f.mul[j];
        const double* bj = b + static_cast<std::size_t>(j) * R;
        cplx* wj = w + static_cast<std::size_t>(j) * R;
        const cplx* wp = wj - R;
        for (std::size_t i = 0; i < R; ++i) wj[i] = bj[i] - m * wp[i];
    }
    {
        const cplx inv = 1.0 / f.piv[n - 1];
        cplx* wj = w + static_cast<std::size_t>(n - 1) * R;
        double* oj = out + static_cast<std::size_t>(n - 1) * R;
        for (std::size_t i = 0; i < R; ++i) {
            wj[i] *= inv;
            oj[i] += 2.0 * (r * wj[i]).real();
        }
    }
    for (int j = n - 2; j >= 0; --j) {
        const cplx inv = 1.0 / f.piv[j];
        cplx* wj = w + static_cast<std::size_t>(j) * R;
        const cplx* wn = wj + R;
        double* oj = out + static_cast<std::size_t>(j) * R;
        for (std::size_t i = 0; i < R; ++i) {
            wj[i] = (wj[i] - e * wn[i]) * inv;
            oj[i] += 2.0 * (r * wj[i]).real();
        }
    }
}

} // namespace

ThomasAxisPayload build_thomas_payload(const ToeplitzTridiagOperator& op, double tau,
                                       const RationalScheme& scheme, double kappa_scale,
                                       std::span<const int> ells) {
    if (!(tau > 0.0)) throw ConfigError("tau must be positive");
    if (!(kappa_scale > 0.0)) throw ConfigError("kappa scale must be positive");

    ThomasAxisPayload p;
    p.n = op.n;
    p.tau = tau;
    p.family = scheme.name;
    p.off = cplx(tau * op.off * kappa_scale, 0.0);

    const auto& pole_terms = scheme.terms[0];
    p.poles.reserve(pole_terms.size());
    for (const auto& t : pole_terms) {
        const cplx c = tau * op.diag * kappa_scale - t.pole;
        p.poles.push_back(factor_pole(op.n, c, p.off, t.pole));
    }

    static constexpr int all_ells[] = {1, 2, 3};
    for (int ell : ells.empty() ? std::span<const int>(all_ells) : ells) {
        const auto& terms = scheme.for_ell(ell);
        if (terms.size() != pole_terms.size())
            throw NumericsError("inconsistent pole counts across weight functions");
        auto& res = p.residues[ell - 1];
        res.resize(terms.size());
        for (std::size_t l = 0; l < terms.size(); ++l) {
            if (terms[l].pole != pole_terms[l].pole)
                throw NumericsError("pole ordering differs across weight functions");
            res[l] = terms[l].residue;
        }
    }
    return p;
}

Field apply_Q_thomas(const ThomasAxisPayload& payload, int ell, double tau,
                     const Field& field, Axis axis) {
    if (ell < 1 || ell > 3) throw ConfigError("ell must be 1, 2, or 3");
    if (payload.residues[ell - 1].empty())
        throw ConfigError("no factorization cached for ell=" + std::to_string(ell));
    if (tau != payload.tau)
        throw ConfigError("payload was precomputed for a different tau");
    if (axis_index(axis) >= field.dim())
        throw ConfigError("axis out of range for field dimension");
    if (field.shape()[axis_index(axis)] != payload.n)
        throw ConfigError("field extent does not match cached factorization order");

    const int nx = field.nx(), ny = field.ny(), nz = field.nz();
    Field out(field.dim(), field.shape());
    std::vector<cplx> scratch;

    for (std::size_t l = 0; l < payload.poles.size(); ++l) {
        const auto& f = payload.poles[l];
        const cplx r = payload.residues[ell - 1][l];
        switch (axis) {
        case Axis::X:
            solve_axis_x(f, payload.off, r, field.data(), out.data(), nx,
                         static_cast<std::size_t>(ny) * nz, scratch);
            break;
        case Axis::Y: {
            const std::size_t slab = static_cast<std::size_t>(nx) * ny;
            for (int k = 0; k < nz; ++k)
                solve_axis_planes(f, payload.off, r, field.data() + k * slab,
                                  out.data() + k * slab, nx, ny, scratch);
            break;
        }
        case Axis::Z:
            solve_axis_planes(f, payload.off, r, field.data(), out.data(),
                              static_cast<std::size_t>(nx) * ny, nz, scratch);
            break;
        }
    }
    return out;
}

} // namespace etdrd
