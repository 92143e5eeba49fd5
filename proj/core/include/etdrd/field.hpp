#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <utility>
#include <vector>

#include "etdrd/grid.hpp"

namespace etdrd {

// Dense nodal values on the interior of a tensor grid, x-fastest layout:
// linear index i + nx*(j + ny*k).  2D fields carry nz == 1.
class Field {
public:
    Field() = default;
    Field(int dim, std::array<int, 3> shape);

    static Field zeros(const Grid& grid) { return Field(grid.dim, grid.interior_shape()); }

    int dim() const { return dim_; }
    const std::array<int, 3>& shape() const { return shape_; }
    int nx() const { return shape_[0]; }
    int ny() const { return shape_[1]; }
    int nz() const { return shape_[2]; }
    std::size_t size() const { return data_.size(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(int i, int j, int k = 0) {
        return data_[static_cast<std::size_t>(i) +
                     static_cast<std::size_t>(shape_[0]) * (j + static_cast<std::size_t>(shape_[1]) * k)];
    }
    double at(int i, int j, int k = 0) const {
        return data_[static_cast<std::size_t>(i) +
                     static_cast<std::size_t>(shape_[0]) * (j + static_cast<std::size_t>(shape_[1]) * k)];
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const Field& other) const {
        return dim_ == other.dim_ && shape_ == other.shape_;
    }

    double max_abs() const;
    bool all_finite() const;

private:
    int dim_ = 0;
    std::array<int, 3> shape_{0, 0, 1};
    std::vector<double> data_;
};

// Snapshot format: little-endian binary, magic "ETRD", version u32, dim u32,
// shape u32[3], time f64, then nx*ny*nz f64 values.  save rejects non-finite
// data; load validates magic/version/shape and recomputes the element count.
void save_field(const Field& field, double time, const std::filesystem::path& path);
std::pair<Field, double> load_field(const std::filesystem::path& path);

} // namespace etdrd
