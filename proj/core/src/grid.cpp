#include "etdrd/grid.hpp"

#include <string>

#include "etdrd/errors.hpp"

namespace etdrd {

Grid build_grid(int dim, std::span<const std::pair<double, double>> bounds,
                std::span<const int> m_per_axis) {
    if (dim != 2 && dim != 3)
        throw ConfigError("grid dimension must be 2 or 3, got " + std::to_string(dim));
    if (bounds.size() != static_cast<std::size_t>(dim) ||
        m_per_axis.size() != static_cast<std::size_t>(dim))
        throw ConfigError("bounds/m arrays must have one entry per dimension");

    Grid g;
    g.dim = dim;
    g.m = {1, 1, 1};
    g.low = {0.0, 0.0, 0.0};
    g.high = {1.0, 1.0, 1.0};
    for (int a = 0; a < dim; ++a) {
        auto [lo, hi] = bounds[a];
        if (!(hi > lo))
            throw ConfigError("axis " + std::to_string(a) + ": upper bound must exceed lower");
        if (m_per_axis[a] < 2)
            throw ConfigError("axis " + std::to_string(a) +
                              ": need at least 2 subintervals for a nonempty interior");
        g.low[a] = lo;
        g.high[a] = hi;
        g.m[a] = m_per_axis[a];
    }
    for (int a = 0; a < 3; ++a)
        g.h[a] = (g.high[a] - g.low[a]) / g.m[a];
    return g;
}

Grid unit_box_grid(int dim, int m) {
    std::array<std::pair<double, double>, 3> b{{{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}};
    std::array<int, 3> ms{m, m, m};
    return build_grid(dim, std::span(b).first(dim), std::span(ms).first(dim));
}

} // namespace etdrd
