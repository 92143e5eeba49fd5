#include "etdrd/rational.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "etdrd/errors.hpp"

namespace etdrd {

namespace {

using cplx = std::complex<double>;

cplx horner(std::span<const double> coeffs, cplx x) {
    // coeffs in descending degree order
    cplx acc = coeffs[0];
    for (std::size_t i = 1; i < coeffs.size(); ++i) acc = acc * x + coeffs[i];
    return acc;
}

// Roots of a monic polynomial via Durand-Kerner, then Newton-polished so the
// residue formula N(s)/D'(s) is accurate to machine precision.
std::vector<cplx> polished_roots(std::span<const double> coeffs) {
    const int deg = static_cast<int>(coeffs.size()) - 1;
    std::vector<double> dcoeffs(deg);
    for (int i = 0; i < deg; ++i) dcoeffs[i] = coeffs[i] * (deg - i);

    std::vector<cplx> z(deg);
    const cplx seed(0.4, 0.9);
    cplx p = 1.0;
    for (int k = 0; k < deg; ++k) {
        p *= seed;
        z[k] = p;
    }
    for (int iter = 0; iter < 200; ++iter) {
        double worst = 0.0;
        for (int k = 0; k < deg; ++k) {
            cplx denom = 1.0;
            for (int j = 0; j < deg; ++j)
                if (j != k) denom *= z[k] - z[j];
            const cplx delta = horner(coeffs, z[k]) / denom;
            z[k] -= delta;
            worst = std::max(worst, std::abs(delta));
        }
        if (worst < 1e-13) break;
    }
    for (int k = 0; k < deg; ++k) {
        for (int it = 0; it < 8; ++it) {
            const cplx fx = horner(coeffs, z[k]);
            const cplx dfx = horner(dcoeffs, z[k]);
            if (std::abs(dfx) == 0.0) break;
            const cplx step = fx / dfx;
            z[k] -= step;
            if (std::abs(step) < 1e-16 * std::abs(z[k])) break;
        }
        if (std::abs(horner(coeffs, z[k])) > 1e-10)
            throw NumericsError("root polish failed to converge for denominator root");
    }
    return z;
}

double direct_ratio(std::span<const double> num, std::span<const double> den, double x) {
    return (horner(num, cplx(x, 0.0)) / horner(den, cplx(x, 0.0))).real();
}

double pf_eval(const std::vector<PoleResiduePair>& terms, double x) {
    double acc = 0.0;
    for (const auto& t : terms) acc += (t.residue / (cplx(x, 0.0) - t.pole)).real();
    return 2.0 * acc;
}

// Partial-fraction terms must reproduce the explicit numerator/denominator
// ratio over the operative argument range; guards both the root finding and
// any transcription slip in the coefficients.  Tolerance is relative to the
// unit scale of these functions (all bounded by 1 on x >= 0): the ell=1
// quartic decays like 24/x^4 while its partial-fraction terms stay O(1e-2),
// so near x=100 about 4.5 digits cancel and rounding the poles/residues to
// IEEE doubles already injects ~4e-11 point-relative noise no matter how the
// sum is evaluated.  Against unit scale the observed gap is ~2e-16.  The
// comparison runs in extended precision so it measures the stored data, not
// summation roundoff.
void check_against_direct(const std::vector<PoleResiduePair>& terms,
                          std::span<const double> num, std::span<const double> den,
                          const char* label) {
    using lcplx = std::complex<long double>;
    auto lhorner = [](std::span<const double> c, lcplx x) {
        lcplx acc = static_cast<long double>(c[0]);
        for (std::size_t i = 1; i < c.size(); ++i) acc = acc * x + static_cast<long double>(c[i]);
        return acc;
    };
    for (int i = 0; i <= 400; ++i) {
        const long double x = 100.0L * i / 400.0L;
        const long double direct =
            (lhorner(num, lcplx(x, 0.0L)) / lhorner(den, lcplx(x, 0.0L))).real();
        long double pf = 0.0L;
        for (const auto& t : terms) {
            const lcplx s(static_cast<long double>(t.pole.real()),
                          static_cast<long double>(t.pole.imag()));
            const lcplx r(static_cast<long double>(t.residue.real()),
                          static_cast<long double>(t.residue.imag()));
            pf += (r / (lcplx(x, 0.0L) - s)).real();
        }
        pf *= 2.0L;
        const long double scale = std::max(std::abs(direct), 1.0L);
        if (std::abs(pf - direct) / scale > 1e-12L)
            throw NumericsError(std::string("partial-fraction mismatch for ") + label);
    }
}

std::vector<PoleResiduePair> residue_terms(const std::vector<cplx>& upper_poles,
                                           std::span<const double> num,
                                           std::span<const double> dprime) {
    std::vector<PoleResiduePair> out;
    out.reserve(upper_poles.size());
    for (const cplx& s : upper_poles)
        out.push_back({s, horner(num, s) / horner(dprime, s)});
    return out;
}

} // namespace

std::string family_name(PadeFamily f) {
    return f == PadeFamily::P02 ? "p02" : "p04";
}

const std::vector<PoleResiduePair>& RationalScheme::for_ell(int ell) const {
    if (ell < 1 || ell > 3) throw ConfigError("ell must be 1, 2, or 3");
    return terms[ell - 1];
}

RationalScheme scheme_p02() {
    // denominator x^2 + 2x + 2, upper pole s = -1 + i, D'(s) = 2i
    const cplx s(-1.0, 1.0);
    RationalScheme r;
    r.name = PadeFamily::P02;
    r.terms[0] = {{s, cplx(0.0, -1.0)}};   // N1 = 2
    r.terms[1] = {{s, cplx(0.5, -0.5)}};   // N2 = x + 2
    r.terms[2] = {{s, cplx(0.5, 0.0)}};    // N3 = x + 1

    const double den[] = {1.0, 2.0, 2.0};
    const double n1[] = {2.0};
    const double n2[] = {1.0, 2.0};
    const double n3[] = {1.0, 1.0};
    check_against_direct(r.terms[0], n1, den, "ell=1 (p02)");
    check_against_direct(r.terms[1], n2, den, "ell=2 (p02)");
    check_against_direct(r.terms[2], n3, den, "ell=3 (p02)");
    return r;
}

RationalScheme scheme_p04() {
    const double den[] = {1.0, 4.0, 12.0, 24.0, 24.0};
    const double dprime[] = {4.0, 12.0, 24.0, 24.0};
    const double n1[] = {24.0};
    const double n2[] = {1.0, 4.0, 12.0, 24.0};
    const double n3[] = {1.0, 3.0, 8.0, 12.0};

    auto roots = polished_roots(den);
    std::vector<cplx> upper;
    for (const cplx& z : roots)
        if (z.imag() > 0.0) upper.push_back(z);
    if (upper.size() != 2)
        throw NumericsError("expected exactly two upper-half-plane denominator roots");
    std::sort(upper.begin(), upper.end(),
              [](const cplx& a, const cplx& b) { return a.real() < b.real(); });

    RationalScheme r;
    r.name = PadeFamily::P04;
    r.terms[0] = residue_terms(upper, n1, dprime);
    r.terms[1] = residue_terms(upper, n2, dprime);
    r.terms[2] = residue_terms(upper, n3, dprime);
    check_against_direct(r.terms[0], n1, den, "ell=1 (p04)");
    check_against_direct(r.terms[1], n2, den, "ell=2 (p04)");
    check_against_direct(r.terms[2], n3, den, "ell=3 (p04)");
    return r;
}

RationalScheme scheme_by_family(PadeFamily f) {
    return f == PadeFamily::P02 ? scheme_p02() : scheme_p04();
}

double eval_scalar(const RationalScheme& scheme, int ell, double x) {
    return pf_eval(scheme.for_ell(ell), x);
}

std::vector<double> dvector_values(std::span<const double> eigvals, double tau,
                                   const RationalScheme& scheme, int ell) {
    const auto& terms = scheme.for_ell(ell);
    std::vector<double> values(eigvals.size());
    for (std::size_t k = 0; k < eigvals.size(); ++k) {
        const double x = tau * eigvals[k];
        double acc = 0.0;
        for (const auto& t : terms) acc += (t.residue / (cplx(x, 0.0) - t.pole)).real();
        values[k] = acc;  // half of Q_ell; the 2 lives in the basis transform
    }
    return values;
}

std::vector<DVector> precompute_dvectors(const SpectralFactor& factor, double tau,
                                         const RationalScheme& scheme, Axis axis) {
    if (!(tau > 0.0)) throw ConfigError("tau must be positive");
    std::vector<DVector> out;
    out.reserve(3);
    for (int ell = 1; ell <= 3; ++ell)
        out.push_back({axis, ell, dvector_values(factor.eigvals, tau, scheme, ell)});
    return out;
}

} // namespace etdrd
