#include "etdrd/problems.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "etdrd/errors.hpp"

namespace etdrd {

namespace {

constexpr double kPi = std::numbers::pi;

// product of sin(pi x_a) over the grid's axes
Field sine_product(const Grid& g, double amplitude) {
    Field f = Field::zeros(g);
    const auto sh = g.interior_shape();
    std::array<std::vector<double>, 3> s;
    for (int a = 0; a < g.dim; ++a) {
        s[a].resize(sh[a]);
        for (int i = 0; i < sh[a]; ++i) s[a][i] = std::sin(kPi * g.coord(a, i));
    }
    for (int k = 0; k < sh[2]; ++k)
        for (int j = 0; j < sh[1]; ++j)
            for (int i = 0; i < sh[0]; ++i) {
                double v = amplitude * s[0][i] * s[1][j];
                if (g.dim == 3) v *= s[2][k];
                f.at(i, j, k) = v;
            }
    return f;
}

// per-grid cache so source closures need not rebuild u0 every evaluation;
// keyed on the full grid geometry, not just the shape, so probing the same
// closure on differently-placed grids cannot serve stale values
struct FieldCache {
    Grid key{};
    bool filled = false;
    Field value;

    bool matches(const Grid& g) const {
        return filled && key.dim == g.dim && key.low == g.low && key.high == g.high &&
               key.m == g.m;
    }
    void store(const Grid& g, Field&& f) {
        key = g;
        filled = true;
        value = std::move(f);
    }
};

} // namespace

Field ProblemSpec::exact_field(const Grid& grid, double t) const {
    if (!has_exact) throw ConfigError(name + " has no closed-form solution");
    Field f = Field::zeros(grid);
    const auto sh = grid.interior_shape();
    for (int k = 0; k < sh[2]; ++k)
        for (int j = 0; j < sh[1]; ++j)
            for (int i = 0; i < sh[0]; ++i)
                f.at(i, j, k) = exact(grid.coord(0, i), grid.coord(1, j),
                                      grid.dim == 3 ? grid.coord(2, k) : 0.0, t);
    return f;
}

ProblemSpec allen_cahn(int dim, const ProblemParams& p) {
    if (dim != 2 && dim != 3) throw ConfigError("allen-cahn: dim must be 2 or 3");
    ProblemSpec spec;
    spec.name = dim == 2 ? "allen-cahn-2d" : "allen-cahn-3d";
    spec.dim = dim;
    spec.kappa = p.kappa;
    spec.q = 0.0;
    spec.T = p.T.value_or(1.0);
    spec.default_m = dim == 2 ? 512 : 80;
    spec.coarse = dim == 2 ? 16 : 10;
    spec.has_exact = true;

    const double lambda = p.lambda;
    const double kappa = p.kappa;
    spec.initial_u = [](const Grid& g) { return sine_product(g, 1.0); };
    spec.exact = [lambda, dim](double x, double y, double z, double t) {
        double v = std::exp(-lambda * t) * std::sin(kPi * x) * std::sin(kPi * y);
        if (dim == 3) v *= std::sin(kPi * z);
        return v;
    };

    // u(1-u^2) plus the compensating forcing that pins the decaying
    // product-of-sines solution: psi = (-lambda + kappa*dim*pi^2)u* - u*(1-u*^2)
    auto cache = std::make_shared<FieldCache>();
    const double lin = -lambda + kappa * dim * kPi * kPi;
    spec.source.fn = [cache, lambda, lin](double t, const Field& U, const Grid& g) {
        if (!cache->matches(g)) cache->store(g, sine_product(g, 1.0));
        const Field& u0 = cache->value;
        const double a = std::exp(-lambda * t);
        Field out(U.dim(), U.shape());
        for (std::size_t i = 0; i < U.size(); ++i) {
            const double u = U[i];
            const double ustar = a * u0[i];
            out[i] = u * (1.0 - u * u) + lin * ustar - ustar * (1.0 - ustar * ustar);
        }
        return out;
    };
    return spec;
}

ProblemSpec singular_source(int dim, const ProblemParams& p) {
    if (dim != 2 && dim != 3) throw ConfigError("singular-source: dim must be 2 or 3");
    ProblemSpec spec;
    spec.name = dim == 2 ? "singular-source-2d" : "singular-source-3d";
    spec.dim = dim;
    spec.kappa = p.kappa;
    spec.q = 1.0;
    spec.T = p.T.value_or(1.0);
    spec.default_m = dim == 2 ? 512 : 80;
    spec.coarse = dim == 2 ? 16 : 10;
    spec.reference_N = dim == 2 ? 512 : 320;

    spec.initial_u = [](const Grid& g) { return sine_product(g, 0.99); };
    const double rho = p.rho;
    spec.source.fn = [rho](double t, const Field& U, const Grid&) {
        Field out(U.dim(), U.shape());
        for (std::size_t i = 0; i < U.size(); ++i) {
            const double u = U[i];
            if (u >= 1.0)
                throw StepperAbort("source domain violation: u >= 1 at t=" +
                                       std::to_string(t),
                                   t, -1);
            out[i] = rho * u / (1.0 - u);
        }
        return out;
    };
    spec.source.autonomous = true;
    return spec;
}

ProblemSpec fhn(const ProblemParams& p) {
    ProblemSpec spec;
    spec.name = "fhn-2d";
    spec.dim = 2;
    spec.system = true;
    spec.kappa_u = p.kappa_u;
    spec.kappa_v = p.kappa_v;
    spec.q = 0.0;
    spec.T = p.T.value_or(1.0);
    spec.default_m = 512;
    spec.coarse = 16;
    spec.reference_N = 512;

    const double sigma2 = p.sigma * p.sigma;
    spec.initial_u = [sigma2](const Grid& g) {
        Field f = Field::zeros(g);
        const auto sh = g.interior_shape();
        for (int j = 0; j < sh[1]; ++j)
            for (int i = 0; i < sh[0]; ++i) {
                const double dx = g.coord(0, i) - 0.5, dy = g.coord(1, j) - 0.5;
                f.at(i, j) = std::exp(-(dx * dx + dy * dy) / sigma2);
            }
        return f;
    };
    spec.initial_v = [](const Grid& g) { return Field::zeros(g); };

    const double eps = p.eps, alpha = p.alpha;
    spec.system_source.fn = [eps, alpha](double, const Field& U, const Field& V,
                                         const Grid&) {
        Field fu(U.dim(), U.shape()), fv(U.dim(), U.shape());
        for (std::size_t i = 0; i < U.size(); ++i) {
            const double u = U[i], v = V[i];
            fu[i] = u - u * u * u / 3.0 - v;
            fv[i] = eps * (u - alpha * v);
        }
        return std::pair{std::move(fu), std::move(fv)};
    };
    return spec;
}

ProblemSpec problem_by_name(const std::string& name, const ProblemParams& p) {
    if (name == "allen-cahn-2d") return allen_cahn(2, p);
    if (name == "allen-cahn-3d") return allen_cahn(3, p);
    if (name == "singular-source-2d") return singular_source(2, p);
    if (name == "singular-source-3d") return singular_source(3, p);
    if (name == "fhn-2d") return fhn(p);
    throw ConfigError("unknown problem '" + name + "'");
}

std::vector<std::string> problem_names() {
    return {"allen-cahn-2d", "allen-cahn-3d", "singular-source-2d", "singular-source-3d",
            "fhn-2d"};
}

} // namespace etdrd
