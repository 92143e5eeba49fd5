#include <cmath>
#include <complex>

#include "doctest.h"
#include "etdrd/errors.hpp"
#include "etdrd/operators.hpp"
#include "etdrd/rational.hpp"

using namespace etdrd;
using cplx = std::complex<double>;

namespace {

// independent direct-form evaluation from hand-entered polynomial coefficients
double direct(const std::vector<double>& num, const std::vector<double>& den, double x) {
    auto horner = [&](const std::vector<double>& c) {
        double acc = c[0];
        for (std::size_t i = 1; i < c.size(); ++i) acc = acc * x + c[i];
        return acc;
    };
    return horner(num) / horner(den);
}

const std::vector<double> kDen02{1, 2, 2};
const std::vector<std::vector<double>> kNum02{{2}, {1, 2}, {1, 1}};
const std::vector<double> kDen04{1, 4, 12, 24, 24};
const std::vector<std::vector<double>> kNum04{{24}, {1, 4, 12, 24}, {1, 3, 8, 12}};

} // namespace

TEST_CASE("half-quadrant pole and residues are the known closed forms") {
    const auto s = scheme_p02();
    REQUIRE(s.terms[0].size() == 1);
    CHECK(std::abs(s.terms[0][0].pole - cplx(-1.0, 1.0)) <= 1e-15);
    CHECK(std::abs(s.terms[0][0].residue - cplx(0.0, -1.0)) <= 1e-15);
    CHECK(std::abs(s.terms[1][0].residue - cplx(0.5, -0.5)) <= 1e-15);
    CHECK(std::abs(s.terms[2][0].residue - cplx(0.5, 0.0)) <= 1e-15);
}

TEST_CASE("quartic denominator roots satisfy D(s)=0") {
    const auto s = scheme_p04();
    REQUIRE(s.terms[0].size() == 2);
    for (const auto& term : s.terms[0]) {
        cplx d = 1.0;
        for (double c : {4.0, 12.0, 24.0, 24.0}) d = d * term.pole + c;
        CHECK(std::abs(d) <= 1e-10);
        CHECK(term.pole.imag() > 0.0);
    }
    CHECK(s.terms[0][0].pole.real() < s.terms[0][1].pole.real());
    // same poles across ell; only residues differ
    for (int e = 1; e < 3; ++e)
        for (int l = 0; l < 2; ++l)
            CHECK(std::abs(s.terms[e][l].pole - s.terms[0][l].pole) == 0.0);
}

TEST_CASE("partial fractions reproduce the direct ratio on [0,100]") {
    const auto p02 = scheme_p02();
    const auto p04 = scheme_p04();
    for (int ell = 1; ell <= 3; ++ell) {
        double worst02 = 0.0, worst04 = 0.0;
        for (int i = 0; i <= 1000; ++i) {
            const double x = 100.0 * i / 1000.0;
            const double d02 = direct(kNum02[ell - 1], kDen02, x);
            const double d04 = direct(kNum04[ell - 1], kDen04, x);
            worst02 = std::max(worst02, std::abs(eval_scalar(p02, ell, x) - d02) /
                                            std::max(1.0, std::abs(d02)));
            worst04 = std::max(worst04, std::abs(eval_scalar(p04, ell, x) - d04) /
                                            std::max(1.0, std::abs(d04)));
        }
        CHECK(worst02 <= 1e-12);
        CHECK(worst04 <= 1e-12);
    }
}

TEST_CASE("weight limits at the origin") {
    for (const auto& s : {scheme_p02(), scheme_p04()}) {
        CHECK(eval_scalar(s, 1, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(eval_scalar(s, 2, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(eval_scalar(s, 3, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
    }
    CHECK_THROWS_AS((void)eval_scalar(scheme_p02(), 0, 1.0), ConfigError);
    CHECK_THROWS_AS((void)eval_scalar(scheme_p02(), 4, 1.0), ConfigError);
}

TEST_CASE("weights decay for large arguments") {
    for (const auto& s : {scheme_p02(), scheme_p04()})
        for (int ell = 1; ell <= 3; ++ell)
            CHECK(std::abs(eval_scalar(s, ell, 1e4)) <= 1e-3);
}

TEST_CASE("approximants stay below one on the nonnegative axis") {
    for (const auto& s : {scheme_p02(), scheme_p04()}) {
        double worst = 0.0;
        for (int i = 0; i <= 12000; ++i) {
            // log-spaced from 1e-6 to 1e6, plus x=0
            const double x = i == 0 ? 0.0 : std::pow(10.0, -6.0 + 12.0 * (i - 1) / 11999.0);
            worst = std::max(worst, std::abs(eval_scalar(s, 1, x)));
        }
        CHECK(worst <= 1.0 + 1e-12);
    }
}

TEST_CASE("leading-order defect against the exponential") {
    // |e^{-x} - P02(x)| = O(x^3) and |e^{-x} - P04(x)| = O(x^5) near zero
    const auto p02 = scheme_p02();
    const auto p04 = scheme_p04();
    double w3 = 0.0, w5 = 0.0;
    for (int i = 1; i <= 2000; ++i) {
        const double x = static_cast<double>(i) / 2000.0;
        w3 = std::max(w3, std::abs(std::exp(-x) - eval_scalar(p02, 1, x)) / (x * x * x));
        // below x ~ 2e-3 the quintic signal sinks under double roundoff,
        // so only sample where it is resolvable
        if (x >= 0.05)
            w5 = std::max(w5, std::abs(std::exp(-x) - eval_scalar(p04, 1, x)) /
                                  (x * x * x * x * x));
    }
    CHECK(w3 <= 0.5);   // actual leading coefficient is 1/6
    CHECK(w5 <= 0.05);  // actual leading coefficient is 1/120
}

TEST_CASE("d-vectors carry half the scalar weight") {
    const Grid g = unit_box_grid(2, 9);
    const auto factor = spectral_factor(build_operator(g, Axis::X, 1.0, 1.0));
    const double tau = 0.013;
    for (const auto& s : {scheme_p02(), scheme_p04()})
        for (int ell = 1; ell <= 3; ++ell) {
            const auto d = dvector_values(factor.eigvals, tau, s, ell);
            for (std::size_t k = 0; k < d.size(); ++k)
                CHECK(2.0 * d[k] == doctest::Approx(eval_scalar(s, ell, tau * factor.eigvals[k]))
                                        .epsilon(1e-14));
        }
}

TEST_CASE("precompute covers ell 1..3 and validates tau") {
    const Grid g = unit_box_grid(2, 5);
    const auto factor = spectral_factor(build_operator(g, Axis::Y, 1.0, 0.0));
    const auto dv = precompute_dvectors(factor, 0.1, scheme_p02(), Axis::Y);
    REQUIRE(dv.size() == 3);
    for (int e = 0; e < 3; ++e) {
        CHECK(dv[e].ell == e + 1);
        CHECK(dv[e].axis == Axis::Y);
        CHECK(dv[e].values.size() == static_cast<std::size_t>(factor.n));
    }
    CHECK_THROWS_AS((void)precompute_dvectors(factor, 0.0, scheme_p02(), Axis::X),
                    ConfigError);
}
