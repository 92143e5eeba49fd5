#include "etdrd/field.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "etdrd/errors.hpp"

namespace etdrd {

Field::Field(int dim, std::array<int, 3> shape) : dim_(dim), shape_(shape) {
    if (dim != 2 && dim != 3) throw ConfigError("field dimension must be 2 or 3");
    if (dim == 2 && shape[2] != 1) throw ConfigError("2D field must have nz == 1");
    for (int a = 0; a < 3; ++a)
        if (shape[a] < 1) throw ConfigError("field extents must be positive");
    data_.assign(static_cast<std::size_t>(shape[0]) * shape[1] * shape[2], 0.0);
}

double Field::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

bool Field::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

namespace {
constexpr char kMagic[4] = {'E', 'T', 'R', 'D'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ofstream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint32_t get_u32(std::ifstream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
} // namespace

void save_field(const Field& field, double time, const std::filesystem::path& path) {
    if (!field.all_finite())
        throw NumericsError("refusing to save field with non-finite entries");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
    os.write(kMagic, 4);
    put_u32(os, kVersion);
    put_u32(os, static_cast<std::uint32_t>(field.dim()));
    for (int a = 0; a < 3; ++a) put_u32(os, static_cast<std::uint32_t>(field.shape()[a]));
    os.write(reinterpret_cast<const char*>(&time), sizeof time);
    os.write(reinterpret_cast<const char*>(field.data()),
             static_cast<std::streamsize>(field.size() * sizeof(double)));
    if (!os) throw ConfigError("short write to " + path.string());
}

std::pair<Field, double> load_field(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw ConfigError(path.string() + ": not a field snapshot");
    if (get_u32(is) != kVersion) throw ConfigError(path.string() + ": unsupported version");
    const int dim = static_cast<int>(get_u32(is));
    std::array<int, 3> shape;
    for (int a = 0; a < 3; ++a) shape[a] = static_cast<int>(get_u32(is));
    double time = 0.0;
    is.read(reinterpret_cast<char*>(&time), sizeof time);

    Field f(dim, shape);
    is.read(reinterpret_cast<char*>(f.data()),
            static_cast<std::streamsize>(f.size() * sizeof(double)));
    if (!is) throw ConfigError(path.string() + ": truncated snapshot");
    if (!f.all_finite()) throw NumericsError(path.string() + ": snapshot has non-finite entries");
    return {std::move(f), time};
}

} // namespace etdrd
