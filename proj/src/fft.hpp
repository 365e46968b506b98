#pragma once

#include <span>
#include <vector>

#include "anisonorm/grid.hpp"

namespace anisonorm::detail {

/// Unnormalized multi-dimensional FFT; sign = -1 forward, +1 backward.
void fft(const std::vector<std::size_t>& dims, std::span<const cplx> in, std::span<cplx> out, int sign);

}  // namespace anisonorm::detail
