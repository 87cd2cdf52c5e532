#include "bohmion/field_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "bohmion/error.hpp"

namespace bohmion {

namespace {

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

constexpr std::array<char, 4> kMagic{'B', 'O', 'H', 'M'};

template <class T>
void put(std::ofstream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::filesystem::path& path) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
        throw Error(ErrorKind::io, "truncated snapshot header in " + path.string());
    }
    return value;
}

} // namespace

void write_field(const std::filesystem::path& path, const WaveField& field) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
    }
    out.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out, kSnapshotFormatVersion);
    put<std::uint64_t>(out, field.grid().n());
    put<double>(out, field.grid().x_min());
    put<double>(out, field.grid().x_max());
    put<double>(out, field.time());
    const auto values = field.values();
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(Complex)));
    if (!out) {
        throw Error(ErrorKind::io, "write failed for " + path.string());
    }
}

WaveField read_field(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io, "cannot open " + path.string());
    }
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
        throw Error(ErrorKind::io, "bad snapshot magic in " + path.string());
    }
    const auto version = get<std::uint32_t>(in, path);
    if (version != kSnapshotFormatVersion) {
        throw Error(ErrorKind::io, "unsupported snapshot version " + std::to_string(version) +
                                       " in " + path.string());
    }
    const auto n = get<std::uint64_t>(in, path);
    const auto x_min = get<double>(in, path);
    const auto x_max = get<double>(in, path);
    const auto time = get<double>(in, path);
    const Grid2D grid = make_grid(x_min, x_max, n);
    ComplexBuffer data(grid.size());
    if (!in.read(reinterpret_cast<char*>(data.data()),
                 static_cast<std::streamsize>(data.size() * sizeof(Complex)))) {
        throw Error(ErrorKind::io, "truncated snapshot payload in " + path.string());
    }
    return WaveField(grid, std::move(data), time);
}

} // namespace bohmion
