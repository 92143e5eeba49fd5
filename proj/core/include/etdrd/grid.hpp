#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <utility>

namespace etdrd {

enum class Axis : int { X = 0, Y = 1, Z = 2 };

inline constexpr int axis_index(Axis a) { return static_cast<int>(a); }

// Uniform tensor-product grid on a box, dim in {2,3}.  m[a] counts
// subintervals along axis a, so the interior (homogeneous Dirichlet)
// point count is m[a]-1.  For dim==2 the z slots are inert: m[2]==1.
struct Grid {
    int dim = 2;
    std::array<double, 3> low{0.0, 0.0, 0.0};
    std::array<double, 3> high{1.0, 1.0, 1.0};
    std::array<int, 3> m{2, 2, 1};
    std::array<double, 3> h{0.5, 0.5, 1.0};

    int interior(Axis a) const { return m[axis_index(a)] - 1; }
    int interior(int a) const { return m[a] - 1; }

    std::size_t total_interior() const {
        std::size_t n = 1;
        for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(m[a] - 1);
        return n;
    }

    // Interior coordinate i = 0 .. m[a]-2 along axis a.
    double coord(int a, int i) const { return low[a] + (i + 1) * h[a]; }

    std::array<int, 3> interior_shape() const {
        return {m[0] - 1, m[1] - 1, dim == 3 ? m[2] - 1 : 1};
    }
};

// bounds/m_per_axis must have dim entries; every axis needs m >= 2 so the
// interior is nonempty.  Throws ConfigError on violation.
Grid build_grid(int dim, std::span<const std::pair<double, double>> bounds,
                std::span<const int> m_per_axis);

// Convenience: (0,1)^dim with the same subdivision count on every axis.
Grid unit_box_grid(int dim, int m);

} // namespace etdrd
