#include "anisonorm/agf.hpp"

#include <array>
#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>

#include "anisonorm/errors.hpp"

namespace anisonorm {
namespace {

constexpr std::array<char, 4> kMagic{'A', 'G', 'F', '1'};

template <typename T>
void put(std::ostream& out, T value) {
    std::array<unsigned char, sizeof(T)> bytes{};
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get(std::istream& in, const char* what) {
    std::array<unsigned char, sizeof(T)> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
    if (in.gcount() != static_cast<std::streamsize>(sizeof(T)))
        throw ValidationError(std::string("AGF file truncated while reading ") + what);
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

}  // namespace

GridFunction read_agf(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (in.gcount() != 4 || magic != kMagic) throw ValidationError("not an AGF file (bad magic)");

    const auto d = get<std::uint32_t>(in, "axis count");
    if (d == 0 || d > 16) throw ValidationError("AGF file has an implausible axis count");
    std::vector<std::size_t> n(d);
    std::vector<double> half(d), weight(d);
    std::optional<std::size_t> time_axis;
    for (std::uint32_t i = 0; i < d; ++i) {
        n[i] = get<std::uint32_t>(in, "axis header");
        half[i] = get<double>(in, "axis header");
        weight[i] = get<double>(in, "axis header");
        const auto flag = get<std::uint8_t>(in, "axis header");
        if (flag > 1) throw ValidationError("AGF time flag must be 0 or 1");
        if (flag == 1) {
            if (time_axis) throw ValidationError("AGF file marks more than one time axis");
            time_axis = i;
        }
        if (n[i] == 0 || (n[i] & (n[i] - 1)) != 0) throw ValidationError("AGF axis length is not a power of two");
    }
    Grid grid(std::move(n), std::move(half), std::move(weight), time_axis);

    std::vector<cplx> values(grid.size());
    for (auto& v : values) {
        const double re = get<double>(in, "payload");
        const double im = get<double>(in, "payload");
        v = {re, im};
    }
    return GridFunction(std::move(grid), std::move(values));
}

void write_agf(const GridFunction& u, std::ostream& out) {
    const Grid& grid = u.grid();
    out.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.dim()));
    for (std::size_t i = 0; i < grid.dim(); ++i) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.samples(i)));
        put<double>(out, grid.half_extent(i));
        put<double>(out, grid.weight(i));
        put<std::uint8_t>(out, grid.time_axis() == i ? 1 : 0);
    }
    for (const auto& v : u.values()) {
        put<double>(out, v.real());
        put<double>(out, v.imag());
    }
    if (!out) throw ValidationError("failed to write AGF data");
}

GridFunction read_agf(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    return read_agf(in);
}

void write_agf(const GridFunction& u, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot create " + path.string());
    write_agf(u, out);
}

}  // namespace anisonorm
