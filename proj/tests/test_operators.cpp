#include <cmath>
#include <numbers>

#include "doctest.h"
#include "etdrd/errors.hpp"
#include "etdrd/operators.hpp"
#include "oracles.hpp"

using namespace etdrd;

TEST_CASE("grid construction and coordinates") {
    const Grid g = unit_box_grid(2, 8);
    CHECK(g.dim == 2);
    CHECK(g.interior(Axis::X) == 7);
    CHECK(g.h[0] == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(g.coord(0, 0) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(g.coord(0, 6) == doctest::Approx(0.875).epsilon(1e-15));
    CHECK(g.total_interior() == 49);

    std::array<std::pair<double, double>, 3> b{{{-1.0, 3.0}, {0.0, 2.0}, {0.0, 1.0}}};
    std::array<int, 3> ms{4, 8, 5};
    const Grid g3 = build_grid(3, b, ms);
    CHECK(g3.h[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g3.coord(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(g3.interior_shape() == std::array<int, 3>{3, 7, 4});
}

TEST_CASE("grid validation") {
    std::array<std::pair<double, double>, 2> b{{{0.0, 1.0}, {1.0, 1.0}}};
    std::array<int, 2> ms{4, 4};
    CHECK_THROWS_AS((void)build_grid(2, b, ms), ConfigError);  // hi == lo
    b[1] = {0.0, 1.0};
    ms[0] = 1;
    CHECK_THROWS_AS((void)build_grid(2, b, ms), ConfigError);  // m < 2
    ms[0] = 4;
    CHECK_THROWS_AS((void)build_grid(4, b, ms), ConfigError);  // bad dim
}

TEST_CASE("directional operator entries") {
    const Grid g = unit_box_grid(2, 10);
    const double h = 0.1, kappa = 0.7, q = 0.3;
    const auto op = build_operator(g, Axis::X, kappa, q);
    CHECK(op.n == 9);
    // each of the two directions carries half of the reaction coefficient
    CHECK(op.diag == doctest::Approx((2 * kappa + (q / 2) * h * h) / (h * h)).epsilon(1e-15));
    CHECK(op.off == doctest::Approx(-kappa / (h * h)).epsilon(1e-15));

    const Grid g3 = unit_box_grid(3, 10);
    const auto op3 = build_operator(g3, Axis::Z, kappa, q);
    CHECK(op3.diag == doctest::Approx((2 * kappa + (q / 3) * h * h) / (h * h)).epsilon(1e-15));

    CHECK_THROWS_AS((void)build_operator(g, Axis::Z, kappa, q), ConfigError);  // no z in 2D
    CHECK_THROWS_AS((void)build_operator(g, Axis::X, -1.0, q), ConfigError);
    CHECK_THROWS_AS((void)build_operator(g, Axis::X, kappa, -0.5), ConfigError);
}

TEST_CASE("closed-form eigensystem matches a Jacobi eigensolver") {
    const Grid g = unit_box_grid(2, 10);
    const auto op = build_operator(g, Axis::X, 1.3, 0.8);
    const auto factor = spectral_factor(op);
    const int n = op.n;

    const auto dense = oracles::dense_tridiag(op);
    const auto es = oracles::jacobi_eigensystem(dense, n);

    for (int k = 0; k < n; ++k)
        CHECK(factor.eigvals[k] ==
              doctest::Approx(es.values[k]).epsilon(1e-12));

    // columns agree up to sign
    for (int k = 0; k < n; ++k) {
        double dot = 0.0;
        for (int i = 0; i < n; ++i) dot += factor.p(i, k) * es.vectors[i + n * k];
        CHECK(std::abs(dot) == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("eigenvalues ascend and eigenvectors are orthonormal") {
    const Grid g = unit_box_grid(3, 13);
    const auto op = build_operator(g, Axis::Y, 0.01, 1.0);
    const auto factor = spectral_factor(op);
    const int n = op.n;

    for (int k = 1; k < n; ++k) CHECK(factor.eigvals[k] > factor.eigvals[k - 1]);

    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
            double dot = 0.0;
            for (int i = 0; i < n; ++i) dot += factor.p(i, a) * factor.p(i, b);
            CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-13));
        }
}

TEST_CASE("eigen residual A p = lambda p") {
    const Grid g = unit_box_grid(2, 9);
    const auto op = build_operator(g, Axis::X, 2.0, 0.5);
    const auto factor = spectral_factor(op);
    const int n = op.n;
    for (int k = 0; k < n; ++k) {
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            double r = op.diag * factor.p(i, k) - factor.eigvals[k] * factor.p(i, k);
            if (i > 0) r += op.off * factor.p(i - 1, k);
            if (i + 1 < n) r += op.off * factor.p(i + 1, k);
            worst = std::max(worst, std::abs(r));
        }
        CHECK(worst <= 1e-11 * std::abs(factor.eigvals[n - 1]));
    }
}

TEST_CASE("eigenvalue formula") {
    const Grid g = unit_box_grid(2, 6);
    const auto op = build_operator(g, Axis::X, 1.0, 0.0);
    const auto factor = spectral_factor(op);
    const double pi = std::numbers::pi;
    // off < 0, cos decreasing: the formula is already ascending in k
    for (int k = 0; k < op.n; ++k) {
        const double expect = op.diag + 2.0 * op.off * std::cos((k + 1) * pi / (op.n + 1));
        CHECK(factor.eigvals[k] == doctest::Approx(expect).epsilon(1e-13));
    }
}
