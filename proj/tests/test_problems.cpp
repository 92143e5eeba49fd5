#include <cmath>
#include <random>

#include "doctest.h"
#include "etdrd/errors.hpp"
#include "etdrd/problems.hpp"
#include "oracles.hpp"

using namespace etdrd;

namespace {

Field random_field(const Grid& g, unsigned seed, double lo, double hi) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    Field f = Field::zeros(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = dist(rng);
    return f;
}

} // namespace

TEST_CASE("decaying-sine problem: exact solution at t=0 is the initial state") {
    for (int dim : {2, 3}) {
        const auto spec = allen_cahn(dim);
        const Grid g = unit_box_grid(dim, 8);
        const Field u0 = spec.initial_u(g);
        const Field e0 = spec.exact_field(g, 0.0);
        CHECK(oracles::max_abs_diff(u0, e0) <= 1e-15);
        CHECK(spec.has_exact);
        CHECK(spec.q == 0.0);
        CHECK(spec.reference_N == 0);
    }
}

TEST_CASE("decaying-sine problem: exact solution vanishes on the boundary") {
    const auto spec = allen_cahn(2);
    CHECK(std::abs(spec.exact(0.0, 0.37, 0.0, 0.2)) <= 1e-15);
    CHECK(std::abs(spec.exact(1.0, 0.37, 0.0, 0.2)) <= 1e-15);
    CHECK(std::abs(spec.exact(0.41, 1.0, 0.0, 0.2)) <= 1e-15);
    const auto spec3 = allen_cahn(3);
    CHECK(std::abs(spec3.exact(0.41, 0.2, 0.0, 0.7)) <= 1e-15);
}

TEST_CASE("decaying-sine source collapses to its linear part on the exact solution") {
    // the cubic terms cancel when evaluated at u = u_exact(t), leaving
    // (kappa*dim*pi^2 - lambda) * u; this pins the compensating forcing
    // without re-deriving it
    for (int dim : {2, 3}) {
        ProblemParams p;
        p.lambda = 1.7;
        p.kappa = 0.8;
        const auto spec = allen_cahn(dim, p);
        const Grid g = unit_box_grid(dim, 9);
        for (double t : {0.0, 0.3, 0.9}) {
            const Field u = spec.exact_field(g, t);
            const Field f = spec.source(t, u, g);
            const double lin = p.kappa * dim * M_PI * M_PI - p.lambda;
            double worst = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i)
                worst = std::max(worst, std::abs(f[i] - lin * u[i]));
            CHECK(worst <= 1e-12);
        }
    }
}

TEST_CASE("decaying-sine source is genuinely nonlinear away from the exact solution") {
    const auto spec = allen_cahn(2);
    const Grid g = unit_box_grid(2, 8);
    const Field u = random_field(g, 3, -0.5, 0.5);
    Field u2 = u;
    for (std::size_t i = 0; i < u2.size(); ++i) u2[i] *= 2.0;
    const Field f1 = spec.source(0.2, u, g);
    const Field f2 = spec.source(0.2, u2, g);
    const Field f0 = spec.source(0.2, Field::zeros(g), g);
    // second difference f(2u) - 2f(u) + f(0) kills the affine forcing and
    // leaves -6u^3 from the cubic
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        worst = std::max(worst, std::abs((f2[i] - 2.0 * f1[i] + f0[i]) -
                                         (-6.0 * u[i] * u[i] * u[i])));
    CHECK(worst <= 1e-13);
}

TEST_CASE("blow-up source: formula, domain guard, initial amplitude") {
    ProblemParams p;
    p.rho = 0.25;
    const auto spec = singular_source(2, p);
    CHECK(spec.q == 1.0);
    CHECK(spec.reference_N == 512);
    CHECK_FALSE(spec.has_exact);
    CHECK_THROWS_AS((void)spec.exact_field(unit_box_grid(2, 4), 0.0), ConfigError);

    const Grid g = unit_box_grid(2, 8);
    const Field u = random_field(g, 7, -0.8, 0.95);
    const Field f = spec.source(0.1, u, g);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        worst = std::max(worst, std::abs(f[i] - 0.25 * u[i] / (1.0 - u[i])));
    CHECK(worst <= 1e-15);

    Field bad = u;
    bad[3] = 1.0;
    CHECK_THROWS_AS((void)spec.source(0.1, bad, g), StepperAbort);

    // peak sits strictly inside the invariant region u < 1
    const Field u0 = spec.initial_u(g);
    CHECK(u0.max_abs() == doctest::Approx(0.99).epsilon(1e-12));
    const auto spec3 = singular_source(3);
    CHECK(spec3.reference_N == 320);
}

TEST_CASE("activator-inhibitor system: initial data and reaction terms") {
    const auto spec = fhn();
    CHECK(spec.system);
    CHECK(spec.kappa_u == doctest::Approx(0.01));
    CHECK(spec.kappa_v == doctest::Approx(10.0));
    CHECK(spec.reference_N == 512);

    const Grid g = unit_box_grid(2, 16);
    const Field v0 = spec.initial_v(g);
    for (std::size_t i = 0; i < v0.size(); ++i) CHECK(v0[i] == 0.0);

    const Field u0 = spec.initial_u(g);
    // default bump width 0.05: value at the grid point nearest the center
    const double x = g.coord(0, 7), y = g.coord(1, 7);
    const double want =
        std::exp(-((x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5)) / (0.05 * 0.05));
    CHECK(u0.at(7, 7) == doctest::Approx(want).epsilon(1e-13));
    // essentially zero against the walls
    CHECK(std::abs(u0.at(0, 0)) <= 1e-11);
    CHECK(std::abs(u0.at(g.interior(Axis::X) - 1, 0)) <= 1e-11);

    ProblemParams p;
    p.eps = 0.4;
    p.alpha = 1.3;
    const auto spec2 = fhn(p);
    const Field u = random_field(g, 9, -1.0, 1.0);
    const Field v = random_field(g, 10, -1.0, 1.0);
    const auto [fu, fv] = spec2.system_source.fn(0.0, u, v, g);
    double wu = 0.0, wv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        wu = std::max(wu, std::abs(fu[i] - (u[i] - u[i] * u[i] * u[i] / 3.0 - v[i])));
        wv = std::max(wv, std::abs(fv[i] - 0.4 * (u[i] - 1.3 * v[i])));
    }
    CHECK(wu <= 1e-15);
    CHECK(wv <= 1e-15);
}

TEST_CASE("name lookup covers the full catalogue and rejects strangers") {
    for (const auto& name : problem_names()) {
        const auto spec = problem_by_name(name);
        CHECK(spec.name == name);
    }
    CHECK(problem_names().size() == 5);
    CHECK_THROWS_AS((void)problem_by_name("heat-1d"), ConfigError);
}

TEST_CASE("parameter overrides flow into the ProblemSpec") {
    ProblemParams p;
    p.kappa = 2.5;
    p.T = 4.0;
    const auto spec = allen_cahn(2, p);
    CHECK(spec.kappa == doctest::Approx(2.5));
    CHECK(spec.T == doctest::Approx(4.0));

    ProblemParams ps;
    ps.kappa_u = 0.2;
    ps.kappa_v = 3.0;
    const auto sys = fhn(ps);
    CHECK(sys.kappa_u == doctest::Approx(0.2));
    CHECK(sys.kappa_v == doctest::Approx(3.0));

    // lambda steers the decay rate of the closed-form solution
    ProblemParams pl;
    pl.lambda = 3.0;
    const auto fast = allen_cahn(2, pl);
    CHECK(fast.exact(0.5, 0.5, 0.0, 1.0) ==
          doctest::Approx(std::exp(-3.0)).epsilon(1e-13));
}

TEST_CASE("defaults: grid sizes, snapshot counts, final times") {
    CHECK(allen_cahn(2).default_m == 512);
    CHECK(allen_cahn(3).default_m == 80);
    CHECK(allen_cahn(2).coarse == 16);
    CHECK(allen_cahn(3).coarse == 10);
    CHECK(allen_cahn(2).T == doctest::Approx(1.0));
    CHECK(singular_source(3).coarse == 10);
    CHECK(fhn().coarse == 16);
}
