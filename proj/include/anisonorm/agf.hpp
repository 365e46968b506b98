#pragma once

#include <filesystem>
#include <iosfwd>

#include "anisonorm/grid.hpp"

namespace anisonorm {

// Binary grid file: "AGF1", u32 d, per axis {u32 N, f64 L, f64 a, u8 is_time},
// then prod N complex samples as little-endian (re, im) doubles, last axis fastest.
GridFunction read_agf(const std::filesystem::path& path);
void write_agf(const GridFunction& u, const std::filesystem::path& path);

GridFunction read_agf(std::istream& in);
void write_agf(const GridFunction& u, std::ostream& out);

}  // namespace anisonorm
