#pragma once

#include <array>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "etdrd/grid.hpp"
#include "etdrd/operators.hpp"

namespace etdrd {

// One term of a partial-fraction expansion restricted to the upper half
// plane: the full real-valued function is x -> 2*Re(residue/(x - pole)).
struct PoleResiduePair {
    std::complex<double> pole;
    std::complex<double> residue;
};

enum class PadeFamily { P02, P04 };

std::string family_name(PadeFamily f);

// The three rational weight functions of the two-stage scheme,
//   ell=1: approximates exp(-x)
//   ell=2: approximates (1 - exp(-x))/x
//   ell=3: approximates (x - 1 + exp(-x))/x^2,
// each stored as pole/residue terms sharing one denominator.  All three
// share the same pole set; only the residues differ by ell.
struct RationalScheme {
    PadeFamily name = PadeFamily::P02;
    std::array<std::vector<PoleResiduePair>, 3> terms;  // index ell-1

    const std::vector<PoleResiduePair>& for_ell(int ell) const;
};

// Subdiagonal (0,2) family: denominator x^2 + 2x + 2, single pole -1+i.
RationalScheme scheme_p02();

// Subdiagonal (0,4) family: denominator x^4 + 4x^3 + 12x^2 + 24x + 24,
// two upper-half-plane poles found numerically and polished to machine
// precision.  Construction cross-checks the partial fractions against the
// explicit numerator/denominator ratios on [0,100] to 1e-12 relative.
RationalScheme scheme_p04();

RationalScheme scheme_by_family(PadeFamily f);

// Evaluate weight function ell at a scalar x >= 0 via the pole expansion.
double eval_scalar(const RationalScheme& scheme, int ell, double x);

// Diagonal spectral multipliers for one axis:
//   values[k] = sum_l Re(residue_l / (tau*eigvals[k] - pole_l)),
// i.e. half of Q_ell(tau*lambda_k); the factor 2 is folded into the
// surrounding basis transform.
struct DVector {
    Axis axis = Axis::X;
    int ell = 1;
    std::vector<double> values;
};

std::vector<double> dvector_values(std::span<const double> eigvals, double tau,
                                   const RationalScheme& scheme, int ell);

// d-vectors for ell = 1,2,3 for the given factor, tagged with `axis`.
std::vector<DVector> precompute_dvectors(const SpectralFactor& factor, double tau,
                                         const RationalScheme& scheme,
                                         Axis axis = Axis::X);

} // namespace etdrd
